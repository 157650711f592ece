//! The `faultcast` command-line tool.

pub mod dot;
pub mod file;
pub mod report;

use std::ffi::OsString;
use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use faultcast::automata::{sync_product, Alphabet, Dfa, Event};
use faultcast::modular::{cross_check_global, modular_enforce, GlobalGuarantee, ModularPlant};
use faultcast::synth::{check_closed_loop, synthesize, Mode, SynthesisProblem};
use faultcast::verify::{
    build_verifier, check_diagnosable, check_diagnosable_unchecked, check_k_prognosable,
    check_k_prognosable_unchecked, max_prognosis_horizon, max_prognosis_horizon_unchecked,
    observer, shortest_fault_observations, uncertain_states, Horizon, VerifierAutomaton,
};
use faultcast::Error;

use file::AutomatonFile;
use report::ReportFile;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ASSUMPTION: i32 = 3;
pub const EXIT_NO_SOLUTION: i32 = 4;
pub const EXIT_COMPONENT: i32 = 5;
pub const EXIT_TOO_LARGE: i32 = 6;

#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Io(String),
    Core(Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Core(e) => match e {
                Error::AssumptionViolated(_) => EXIT_ASSUMPTION,
                Error::ComponentSynthesisFailed(_) => EXIT_COMPONENT,
                Error::ProductTooLarge(_) | Error::BudgetExceeded { .. } => EXIT_TOO_LARGE,
                Error::NotPrognosable | Error::EmptyFaultLanguage => EXIT_FAILS,
                _ => EXIT_USAGE,
            },
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "faultcast", version, about = "Fault prognosis and diagnosis for discrete-event systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a property of a plant.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Compute the supremal supervisor enforcing a property.
    #[command(subcommand)]
    Synthesize(SynthCommand),
    /// Work with plants made of several components.
    #[command(subcommand)]
    Modular(ModularCommand),
    /// Write the observer of a plant.
    Observer {
        plant: PathBuf,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Write the verifier of a plant; with --N, uncertain pairs are marked.
    Verifier {
        plant: PathBuf,
        #[arg(long = "N", value_name = "N")]
        n: Option<usize>,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Synchronous product of automata.
    Compose {
        #[arg(required = true, num_args = 2..)]
        inputs: Vec<PathBuf>,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    /// Graphviz rendering of an automaton file.
    ExportDot {
        input: PathBuf,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
        /// Fill marked states (used for verifier files, where marked means uncertain).
        #[arg(long)]
        highlight_marked: bool,
    },
}

#[derive(clap::Args, Debug)]
struct VerifyArgs {
    plant: PathBuf,
    /// Write the report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Skip the live and convergent precondition.
    #[arg(long)]
    force: bool,
    /// Record elapsed time in the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Subcommand, Debug)]
enum VerifyCommand {
    /// k-prognosability (k = 0 unless given).
    Prognosis {
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[command(flatten)]
        args: VerifyArgs,
    },
    /// Diagnosability.
    Diagnosis {
        #[command(flatten)]
        args: VerifyArgs,
    },
    /// Largest prognosis horizon.
    MaxK {
        #[command(flatten)]
        args: VerifyArgs,
    },
}

#[derive(clap::Args, Debug)]
struct SynthArgs {
    plant: PathBuf,
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
    /// Write the report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Extra uncontrollable events, comma separated.
    #[arg(long, value_delimiter = ',')]
    uncontrollable: Vec<String>,
    #[arg(long)]
    timing: bool,
}

#[derive(Subcommand, Debug)]
enum SynthCommand {
    Prognosis {
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        args: SynthArgs,
    },
    Diagnosis {
        #[command(flatten)]
        args: SynthArgs,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Prognosis,
    Diagnosis,
}

#[derive(Subcommand, Debug)]
enum ModularCommand {
    /// One local supervisor per component.
    Synthesize {
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(required = true, num_args = 2..)]
        components: Vec<PathBuf>,
        /// Output directory for S_1.json, S_2.json, ... and report.json.
        #[arg(short = 'o', long)]
        output: PathBuf,
        /// Build the global product and check the composed closed loop.
        #[arg(long)]
        cross_check: bool,
        #[arg(long, default_value_t = faultcast::modular::DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long)]
        timing: bool,
    },
}

/// Runs the tool on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let echo: Vec<String> = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match dispatch(cli.command, echo) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("faultcast: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command, echo: Vec<String>) -> Result<i32, CliError> {
    match cmd {
        Command::Verify(v) => verify(v, echo),
        Command::Synthesize(s) => synth(s, echo),
        Command::Modular(ModularCommand::Synthesize {
            mode,
            components,
            output,
            cross_check,
            budget,
            timing,
        }) => modular(mode, &components, &output, cross_check, budget, timing, echo),
        Command::Observer { plant, output, dot } => {
            let (name, g) = load(&plant)?;
            let obs = observer(&g);
            let d = obs.dfa.with_marking(vec![true; obs.n_states()]);
            let name = format!("{name}-observer");
            emit(&AutomatonFile::from_dfa(&name, &d)?.to_json(), output.as_deref())?;
            if let Some(p) = dot {
                write(&p, &dot::to_dot(&name, &d, &[]))?;
            }
            Ok(EXIT_OK)
        }
        Command::Verifier { plant, n, output, dot } => {
            let (name, g) = load(&plant)?;
            let v = build_verifier(&g);
            let uncertain: Vec<bool> = match n {
                Some(n) => {
                    let set = uncertain_states(&v, &g, n);
                    v.pairs.iter().map(|p| set.contains(p)).collect()
                }
                None => vec![false; v.pairs.len()],
            };
            let d = verifier_dfa(&g, &v, &uncertain)?;
            let name = format!("{name}-verifier");
            emit(&AutomatonFile::from_dfa(&name, &d)?.to_json(), output.as_deref())?;
            if let Some(p) = dot {
                write(&p, &dot::to_dot(&name, &d, &uncertain))?;
            }
            if n.is_some() {
                let labels: Vec<&str> = d.marked_states().iter().map(|&q| d.label(q)).collect();
                eprintln!("uncertain: {{{}}}", labels.join(", "));
            }
            Ok(EXIT_OK)
        }
        Command::Compose { inputs, output } => {
            let mut names = Vec::new();
            let mut parts = Vec::new();
            for p in &inputs {
                let (n, d) = load(p)?;
                names.push(n);
                parts.push(d);
            }
            let d = sync_product(&parts)?;
            emit(&AutomatonFile::from_dfa(&names.join("||"), &d)?.to_json(), output.as_deref())?;
            Ok(EXIT_OK)
        }
        Command::ExportDot {
            input,
            output,
            highlight_marked,
        } => {
            let (name, d) = load(&input)?;
            let hl = if highlight_marked {
                d.marking().to_vec()
            } else {
                Vec::new()
            };
            emit(&dot::to_dot(&name, &d, &hl), output.as_deref())?;
            Ok(EXIT_OK)
        }
    }
}

fn verify(cmd: VerifyCommand, echo: Vec<String>) -> Result<i32, CliError> {
    let start = Instant::now();
    let (args, r) = match cmd {
        VerifyCommand::Prognosis { k, args } => {
            let (_, g) = load(&args.plant)?;
            let r = if args.force {
                check_k_prognosable_unchecked(&g, k)
            } else {
                check_k_prognosable(&g, k)?
            };
            (args, ReportFile::from_verdict(echo, &r))
        }
        VerifyCommand::Diagnosis { args } => {
            let (_, g) = load(&args.plant)?;
            let r = if args.force {
                check_diagnosable_unchecked(&g)
            } else {
                check_diagnosable(&g)?
            };
            (args, ReportFile::from_verdict(echo, &r))
        }
        VerifyCommand::MaxK { args } => {
            let (_, g) = load(&args.plant)?;
            let h = if args.force {
                max_prognosis_horizon_unchecked(&g)
            } else {
                max_prognosis_horizon(&g)
            };
            let mut rep = ReportFile::new(echo, "maximal prognosis horizon");
            rep.parameters.n_s = shortest_fault_observations(&g).map(|(n, _)| n);
            match h {
                Ok(Horizon::Bounded(k)) => {
                    rep.result = "holds".into();
                    rep.verdict = Some(true);
                    rep.parameters.k = Some(k);
                }
                Ok(Horizon::Unbounded) => {
                    rep.result = "holds".into();
                    rep.verdict = Some(true);
                    rep.notes.push("no fault-ending string: every horizon holds".into());
                }
                Err(Error::NotPrognosable) => {
                    rep.result = "fails".into();
                    rep.verdict = Some(false);
                    rep.notes.push("not 0-prognosable".into());
                }
                Err(e) => return Err(e.into()),
            }
            (args, rep)
        }
    };
    let mut rep = r;
    if args.timing {
        rep.timing_ms = Some(start.elapsed().as_millis());
    }
    summary(&rep);
    if let Some(p) = &args.report {
        write(p, &rep.to_json())?;
    }
    Ok(if rep.verdict == Some(true) {
        EXIT_OK
    } else {
        EXIT_FAILS
    })
}

fn synth(cmd: SynthCommand, echo: Vec<String>) -> Result<i32, CliError> {
    let start = Instant::now();
    let (mode, args) = match cmd {
        SynthCommand::Prognosis { k, args } => (Mode::Prognosis(k), args),
        SynthCommand::Diagnosis { args } => (Mode::Diagnosis, args),
    };
    let (name, g) = load(&args.plant)?;
    let names: Vec<&str> = args.uncontrollable.iter().map(String::as_str).collect();
    let problem = SynthesisProblem::new(g.clone(), mode).with_uncontrollable(&names)?;
    let r = synthesize(&problem)?;
    let mut rep = ReportFile::new(echo, format!("supervisor for {mode}"));
    rep.iterations = r.trace.iter().map(Into::into).collect();
    match mode {
        Mode::Prognosis(k) => rep.parameters.k = Some(k),
        Mode::Diagnosis => {
            let n_o = observer(&g).n_states();
            rep.parameters.n_o = Some(n_o);
            rep.parameters.n = Some(n_o);
        }
    }
    if !r.maximality_guaranteed {
        rep.notes
            .push("P(Psi) is infinite: the result is sound but may not be maximal".into());
    }
    let code = match &r.supervisor {
        Some(s) => {
            let check = check_closed_loop(&problem, s)?;
            rep.result = "solution".into();
            rep.verdict = Some(check.all());
            rep.notes.push(format!(
                "closed loop: {} states, controllable: {}, normal: {}, {}: {}",
                s.n_states(),
                check.controllable.0,
                check.normal.0,
                mode,
                check.mode_property.0
            ));
            if let Some(out) = &args.output {
                let f = AutomatonFile::from_dfa(&format!("{name}-supervisor"), s)?;
                write(out, &f.to_json())?;
                rep.outputs.push(out.display().to_string());
            }
            EXIT_OK
        }
        None => {
            rep.result = "no-solution".into();
            rep.verdict = Some(false);
            EXIT_NO_SOLUTION
        }
    };
    if args.timing {
        rep.timing_ms = Some(start.elapsed().as_millis());
    }
    summary(&rep);
    if let Some(p) = &args.report {
        write(p, &rep.to_json())?;
    }
    Ok(code)
}

fn modular(
    mode: ModeArg,
    components: &[PathBuf],
    out: &Path,
    cross_check: bool,
    budget: usize,
    timing: bool,
    echo: Vec<String>,
) -> Result<i32, CliError> {
    let start = Instant::now();
    let mut plants = Vec::new();
    for p in components {
        plants.push(load(p)?.1);
    }
    let mp = ModularPlant::new(plants);
    if let Err(errs) = mp.validate() {
        for e in &errs[1..] {
            eprintln!("faultcast: {e}");
        }
        return Err(errs.into_iter().next().expect("non-empty").into());
    }
    let mode = match mode {
        ModeArg::Prognosis => Mode::Prognosis(0),
        ModeArg::Diagnosis => Mode::Diagnosis,
    };
    let mut r = modular_enforce(&mp, mode)?;
    std::fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    let mut rep = ReportFile::new(echo, format!("modular supervisors for {mode}"));
    if mode == Mode::Prognosis(0) {
        rep.parameters.k = Some(0);
    }
    for (i, s) in r.local_supervisors.iter().enumerate() {
        let path = out.join(format!("S_{}.json", i + 1));
        write(&path, &AutomatonFile::from_dfa(&format!("S_{}", i + 1), s)?.to_json())?;
        rep.outputs.push(path.display().to_string());
    }
    rep.notes.push(format!("nonconflicting: {}", r.nonconflicting));
    if !r.fault_separation.is_empty() {
        rep.notes.push(format!("fault separation per component: {:?}", r.fault_separation));
    }
    rep.result = match r.global_guarantee {
        GlobalGuarantee::Prognosable => "prognosable",
        GlobalGuarantee::Diagnosable => "diagnosable",
        GlobalGuarantee::NotGuaranteed => "not-guaranteed",
    }
    .into();
    let guaranteed = r.global_guarantee != GlobalGuarantee::NotGuaranteed;
    rep.verdict = Some(guaranteed);
    if cross_check {
        let c = cross_check_global(&mp, &r, budget)?;
        rep.notes.push(format!("cross-check: {}", c.verdict));
        rep.notes.extend(c.notes.iter().cloned());
        rep.witness = c.witness.as_ref().map(Into::into);
        rep.verdict = Some(guaranteed && c.verdict);
        r.cross_check = Some(c);
    }
    if timing {
        rep.timing_ms = Some(start.elapsed().as_millis());
    }
    summary(&rep);
    let path = out.join("report.json");
    write(&path, &rep.to_json())?;
    Ok(if rep.verdict == Some(true) {
        EXIT_OK
    } else {
        EXIT_FAILS
    })
}

/// The verifier as an automaton over pair events such as `a,a` or `ε,f2`.
fn verifier_dfa(g: &Dfa, v: &VerifierAutomaton, marked: &[bool]) -> Result<Dfa, CliError> {
    let mut kinds: Vec<_> = v.transitions.iter().map(|t| t.1).collect();
    kinds.sort();
    kinds.dedup();
    let a = g.alphabet();
    let events = kinds
        .iter()
        .map(|&pe| {
            let e = pe.0.or(pe.1).expect("one side moves");
            Event::new(
                v.event_label(g, pe),
                a.is_observable(e),
                a.is_controllable(e),
                a.is_fault(e),
            )
        })
        .collect();
    let alphabet = Alphabet::new(events)?;
    let m = kinds.len();
    let mut delta = vec![None; v.pairs.len() * m];
    for &(q, pe, t) in &v.transitions {
        let e = kinds.binary_search(&pe).expect("collected");
        delta[q * m + e] = Some(t);
    }
    let labels = (0..v.pairs.len()).map(|i| v.pair_label(g, i)).collect();
    Ok(Dfa::from_parts(alphabet, labels, delta, v.initial, marked.to_vec())?)
}

fn load(path: &Path) -> Result<(String, Dfa), CliError> {
    let f = AutomatonFile::load(path)?;
    let d = f.to_dfa()?;
    Ok((f.name, d))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn use_color() -> bool {
    std::env::var_os("NO_COLOR").is_none_or(|v| v.is_empty()) && std::io::stdout().is_terminal()
}

fn summary(rep: &ReportFile) {
    let (open, close) = match (use_color(), rep.verdict) {
        (true, Some(true)) => ("\x1b[32m", "\x1b[0m"),
        (true, Some(false)) => ("\x1b[31m", "\x1b[0m"),
        _ => ("", ""),
    };
    println!("{}: {open}{}{close}", rep.property, rep.result);
    let p = &rep.parameters;
    let params: Vec<String> = [("k", p.k), ("N", p.n), ("N_o", p.n_o), ("N_s", p.n_s), ("minimal N", p.minimal_n)]
        .iter()
        .filter_map(|(n, v)| v.map(|v| format!("{n} = {v}")))
        .collect();
    if !params.is_empty() {
        println!("  {}", params.join(", "));
    }
    if let Some(w) = &rep.witness {
        let show = |w: &[String]| if w.is_empty() { "ε".to_string() } else { w.join(" ") };
        println!(
            "  witness: s = {}, P(s) = {}, t = {}, P(t) = {} ({})",
            show(&w.s),
            show(&w.ps),
            show(&w.t),
            show(&w.pt),
            w.note
        );
    }
    for it in &rep.iterations {
        println!(
            "  iteration {}: uncontrollable {:?}, non-normal {:?}, unreachable {:?}",
            it.iteration, it.uncontrollable_removed, it.non_normal_removed, it.unreachable_removed
        );
    }
    for n in &rep.notes {
        println!("  {n}");
    }
}
