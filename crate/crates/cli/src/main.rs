use clap::{Parser, Subcommand, ValueEnum};
use ltw::analysis::{
    is_erasing, mock_shift_table, quasi_periodicity, rule_part_quasi_periodicity, rule_part_tq, Direction, PartRef,
    ShortestWords,
};
use ltw::equivalence::{decide_equiv_with, EquivOptions, EquivVerdict};
use ltw::format::{parse_ltw_with_pool, parse_tree_checked, print_ltw, ParseError};
use ltw::oracle::{brute_equiv_jobs, BruteVerdict, EnumerationBudget};
use ltw::word::{WordError, DEFAULT_SEED};
use ltw::{EqualityMode, Error, Ltw, SlpPool, StateId};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EQUIVALENT: u8 = 0;
const NOT_EQUIVALENT: u8 = 1;
const USAGE: u8 = 2;
const CAP_EXCEEDED: u8 = 3;

/// Longest word printed in full.
const SHOW: usize = 80;

#[derive(Parser)]
#[command(name = "ltw", version, about = "Equivalence and normal forms of linear tree-to-word transducers")]
struct Cli {
    /// Seed for the fingerprint hash parameters.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Compare words symbol by symbol when they are short enough.
    #[arg(long, global = true)]
    exact: bool,
    /// Worker threads for brute-force evaluation.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether two transducers are equivalent.
    Check {
        left: PathBuf,
        right: PathBuf,
        /// Height bound for the witness search after an order mismatch.
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// Compute the partial normal form.
    Normalize {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Evaluate a transducer on a tree.
    Run {
        input: PathBuf,
        #[arg(long)]
        tree: String,
        /// Longest output printed in full.
        #[arg(long, default_value_t = 1_000_000)]
        max_len: usize,
    },
    /// Print shortest words, erasing flags, quasi-periodicity and shifts.
    Analyze {
        input: PathBuf,
        #[arg(long)]
        state: Option<String>,
        #[arg(long, value_enum)]
        direction: Option<Dir>,
        /// A rule part as STATE:SYMBOL:INDEX, the index counting calls from 1.
        #[arg(long)]
        part: Option<String>,
        /// With --part, print the test transducer of the part.
        #[arg(long)]
        show_tq: bool,
    },
    /// Compare two transducers by brute force on bounded trees.
    Oracle {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, default_value_t = 5)]
        depth: usize,
        #[arg(long, default_value_t = 20_000)]
        max_trees: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Dir {
    Left,
    Right,
}

impl From<Dir> for Direction {
    fn from(d: Dir) -> Self {
        match d {
            Dir::Left => Direction::Left,
            Dir::Right => Direction::Right,
        }
    }
}

enum Failure {
    Usage(String),
    Cap(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Word(WordError::CapExceeded(_)) => Failure::Cap(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure::Usage(e.to_string())
    }
}

struct Context {
    seed: u64,
    exact: bool,
    jobs: usize,
}

impl Context {
    fn load(&self, path: &Path) -> Result<Ltw, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let mut pool = SlpPool::with_seed(self.seed);
        if self.exact {
            pool.set_equality_mode(EqualityMode::Exact);
        }
        parse_ltw_with_pool(&text, pool).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
    }
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn check(ctx: &Context, left: &Path, right: &Path, depth: usize) -> Result<u8, Failure> {
    let (a, b) = (ctx.load(left)?, ctx.load(right)?);
    let opts = EquivOptions {
        order_witness: EnumerationBudget {
            depth,
            ..EquivOptions::default().order_witness
        },
        ..EquivOptions::default()
    };
    match decide_equiv_with(&a, &b, opts)? {
        EquivVerdict::Equivalent => {
            println!("equivalent");
            Ok(EQUIVALENT)
        }
        EquivVerdict::NotEquivalent {
            reason,
            witness,
            detail,
        } => {
            println!("not equivalent ({reason}): {detail}");
            match witness {
                Some(t) => {
                    println!("witness: {t}");
                    for (side, m) in [("left", &a), ("right", &b)] {
                        let mut m = m.clone();
                        match m.evaluate(&t) {
                            Ok(w) => println!("{side}: {}", m.pool().display(w, SHOW)),
                            Err(_) => println!("{side}: undefined"),
                        }
                    }
                }
                None => println!("witness: none found up to height {depth}"),
            }
            Ok(NOT_EQUIVALENT)
        }
    }
}

fn normalize(ctx: &Context, input: &Path, output: Option<&Path>, report: Option<&Path>) -> Result<u8, Failure> {
    let m = ctx.load(input)?;
    let (out, rep) = ltw::partial_normal_form(&m)?;
    let text = print_ltw(&out);
    match output {
        Some(p) => write(p, &text)?,
        None => print!("{text}"),
    }
    if let Some(p) = report {
        write(p, &rep.with_timings())?;
    }
    Ok(0)
}

fn run(ctx: &Context, input: &Path, tree: &str, max_len: usize) -> Result<u8, Failure> {
    let mut m = ctx.load(input)?;
    let t = parse_tree_checked(tree, m.alphabet())?;
    match m.evaluate(&t) {
        Ok(w) => {
            println!("{}", m.pool().display(w, max_len));
            println!("length: {}", m.pool().len(w));
            Ok(0)
        }
        Err(e @ Error::UndefinedInput { .. }) => {
            println!("{e}");
            Ok(NOT_EQUIVALENT)
        }
        Err(e) => Err(e.into()),
    }
}

fn parse_part(m: &Ltw, text: &str) -> Result<PartRef, Failure> {
    let bad = || Failure::Usage(format!("expected STATE:SYMBOL:INDEX, got {text}"));
    let mut it = text.split(':');
    let (Some(q), Some(f), Some(i), None) = (it.next(), it.next(), it.next(), it.next()) else {
        return Err(bad());
    };
    Ok(PartRef {
        state: m.state_or_err(q)?,
        symbol: m.alphabet().get(f).ok_or_else(|| Failure::Usage(format!("unknown input symbol {f}")))?,
        index: i.parse().map_err(|_| bad())?,
    })
}

fn analyze_state(m: &mut Ltw, sw: &ShortestWords, q: StateId, dirs: &[Direction]) -> Result<(), Failure> {
    println!("state {}", m.state_name(q));
    match sw.word(q) {
        Some(w) => println!("  shortest: {} (length {})", m.pool().display(w, SHOW), m.pool().len(w)),
        None => {
            println!("  empty domain");
            return Ok(());
        }
    }
    println!("  erasing: {}", if is_erasing(m, q) { "yes" } else { "no" });
    for &d in dirs {
        match quasi_periodicity(m, q, d)? {
            Some(v) => println!("  {}", v.describe(m.pool(), SHOW)),
            None => println!("  not quasi-periodic({d})"),
        }
    }
    let table = mock_shift_table(m, sw, q);
    let shifts: Vec<String> = table
        .shifts
        .iter()
        .map(|(p, s)| format!("{}={s}", m.state_name(*p)))
        .collect();
    println!("  shifts: {}", shifts.join(" "));
    Ok(())
}

fn analyze(
    ctx: &Context,
    input: &Path,
    state: Option<&str>,
    direction: Option<Dir>,
    part: Option<&str>,
    show_tq: bool,
) -> Result<u8, Failure> {
    let mut m = ctx.load(input)?;
    m.trim()?;
    if let Some(text) = part {
        let part = parse_part(&m, text)?;
        let label = format!(
            "part {} {} {}",
            m.state_name(part.state),
            m.alphabet().name(part.symbol),
            part.index
        );
        match rule_part_quasi_periodicity(&mut m, part)? {
            Some(v) => println!("{label}: {}", v.describe(m.pool(), SHOW)),
            None => println!("{label}: not quasi-periodic(left)"),
        }
        if show_tq {
            let (_, _, tq) = rule_part_tq(&m, part)?;
            print!("{}", print_ltw(&tq));
        }
        return Ok(0);
    }
    let dirs: Vec<Direction> = match direction {
        Some(d) => vec![d.into()],
        None => vec![Direction::Left, Direction::Right],
    };
    let states: Vec<StateId> = match state {
        Some(name) => vec![m.state_or_err(name)?],
        None => m.states().collect(),
    };
    let sw = ShortestWords::compute(&mut m);
    for q in states {
        analyze_state(&mut m, &sw, q, &dirs)?;
    }
    Ok(0)
}

fn oracle(ctx: &Context, left: &Path, right: &Path, depth: usize, max_trees: usize) -> Result<u8, Failure> {
    let (a, b) = (ctx.load(left)?, ctx.load(right)?);
    let budget = EnumerationBudget {
        depth,
        max_trees,
        ..EnumerationBudget::default()
    };
    match brute_equiv_jobs(&a, &b, budget, ctx.jobs)? {
        BruteVerdict::NoDifference { checked, stopped_by } => {
            println!("no difference on {checked} trees ({stopped_by})");
            Ok(EQUIVALENT)
        }
        BruteVerdict::Difference { witness, left, right } => {
            let show = |w: &Option<Vec<u8>>| match w {
                Some(w) => String::from_utf8_lossy(w).into_owned(),
                None => "undefined".to_string(),
            };
            println!("difference");
            println!("witness: {witness}");
            println!("left: {}", show(&left));
            println!("right: {}", show(&right));
            Ok(NOT_EQUIVALENT)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Context {
        seed: cli.seed,
        exact: cli.exact,
        jobs: cli.jobs,
    };
    let result = match &cli.command {
        Command::Check { left, right, depth } => check(&ctx, left, right, *depth),
        Command::Normalize { input, output, report } => {
            normalize(&ctx, input, output.as_deref(), report.as_deref())
        }
        Command::Run { input, tree, max_len } => run(&ctx, input, tree, *max_len),
        Command::Analyze {
            input,
            state,
            direction,
            part,
            show_tq,
        } => analyze(&ctx, input, state.as_deref(), *direction, part.as_deref(), *show_tq),
        Command::Oracle {
            left,
            right,
            depth,
            max_trees,
        } => oracle(&ctx, left, right, *depth, *max_trees),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(USAGE)
        }
        Err(Failure::Cap(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(CAP_EXCEEDED)
        }
    }
}
