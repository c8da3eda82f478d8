//! Command-line front end: key generation, encryption, decryption, quotient
//! attacks and statistics over the line-oriented text formats.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use dehncrypt::adversary::{self, AbelianTest, AttackVerdict, Class2Test, EnumerationBudget, VerdictKind};
use dehncrypt::format;
use dehncrypt::presentations::WpError;
use dehncrypt::{keygen, Ciphertext, DehnSolver, KeygenError, ProtocolParams, Rng};

#[derive(Parser)]
#[command(name = "dehncrypt", version, about = "Public-key encryption from the word problem in small cancellation groups")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a key pair.
    Keygen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// TOML file overriding protocol parameters.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long = "pub")]
        public: PathBuf,
        #[arg(long = "priv")]
        private: PathBuf,
    },
    /// Encrypt a bit string with a public key.
    Encrypt {
        #[arg(long = "pub")]
        public: PathBuf,
        #[arg(long, conflicts_with = "input", required_unless_present = "input")]
        bits: Option<String>,
        /// File of 0/1 characters.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover bits with a private key.
    Decrypt {
        #[arg(long = "priv")]
        private: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        /// Defaults to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a quotient or enumeration attack on every ciphertext word.
    Attack {
        #[arg(value_enum)]
        kind: AttackKind,
        #[arg(long = "pub")]
        public: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Statistics on ciphertext corpora and keys.
    #[command(subcommand)]
    Stats(StatsCommand),
    /// Decide the word problem in a small cancellation presentation.
    Wp {
        #[arg(long)]
        presentation: PathBuf,
        /// Signed indices or letters a-t (A-T for inverses).
        #[arg(long)]
        word: String,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum AttackKind {
    Abelian,
    Nilpotent2,
    Enumerate,
}

#[derive(Args)]
struct BudgetArgs {
    /// Enumeration: maximum number of relator factors.
    #[arg(long, default_value_t = 3)]
    max_factors: usize,
    /// Enumeration: maximum conjugator length.
    #[arg(long, default_value_t = 1)]
    max_conj_len: usize,
    /// Enumeration: maximum states explored per word.
    #[arg(long, default_value_t = 100_000)]
    max_states: usize,
}

#[derive(Subcommand)]
enum StatsCommand {
    /// Two-sample chi-square test on subword frequencies.
    Freq {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value_t = 3)]
        max_sub: usize,
    },
    /// Fraction of random words the private key decodes as nontrivial.
    P1 {
        #[arg(long = "priv")]
        private: PathBuf,
        #[arg(long, default_value_t = 150)]
        length: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// An error with the process exit code it maps to.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Self { code: 1, err: e.into() }
    }
}

fn fail(code: u8, err: anyhow::Error) -> Failure {
    Failure { code, err }
}

type Result<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load<T>(path: &Path, parse: impl Fn(&str) -> std::result::Result<T, format::FormatError>) -> anyhow::Result<T> {
    parse(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load_params(path: Option<&Path>) -> anyhow::Result<ProtocolParams> {
    let Some(path) = path else {
        return Ok(ProtocolParams::default());
    };
    let params: ProtocolParams = toml::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
    params.validate()?;
    Ok(params)
}

/// Exit 3 if a ciphertext word uses a generator the key does not have.
fn check_ciphertext(ct: &Ciphertext, gens: usize) -> Result<()> {
    for (i, w) in ct.words.iter().enumerate() {
        if w.check_gens(gens).is_err() {
            return Err(fail(
                3,
                anyhow!("ciphertext word {i} uses generator {} but the key has {gens}", w.max_gen()),
            ));
        }
    }
    Ok(())
}

fn histogram(p: &dehncrypt::Presentation) -> String {
    p.length_histogram().iter().map(|(l, n)| format!("{l}:{n}")).collect::<Vec<_>>().join(",")
}

fn cmd_keygen(seed: u64, params: Option<&Path>, public: &Path, private: &Path) -> Result<()> {
    let params = load_params(params)?;
    let kp = match keygen(&mut Rng::new(seed), &params) {
        Ok(kp) => kp,
        Err(e @ KeygenError::RetryExhausted(_)) => return Err(fail(2, e.into())),
        Err(e) => return Err(e.into()),
    };
    write(public, &format::write_public(&kp.public))?;
    write(private, &format::write_private(&kp.private))?;
    let pubp = &kp.public.presentation;
    let short = pubp.relators().iter().filter(|r| r.len() <= dehncrypt::keygen::SHORT_LEN).count();
    println!("public_generators={}", pubp.gens());
    println!("public_relators={}", pubp.relators().len());
    println!("public_lengths={}", histogram(pubp));
    println!("public_short_fraction={:.3}", short as f64 / pubp.relators().len() as f64);
    println!("private_generators={}", kp.private.presentation().gens());
    println!("private_relators={}", kp.private.presentation().relators().len());
    println!("special={}", kp.public.special);
    println!("retries={}", kp.stats.attempts - 1);
    println!("{}", kp.stats);
    Ok(())
}

fn cmd_encrypt(public: &Path, bits: Option<&str>, input: Option<&Path>, seed: u64, params: Option<&Path>, out: &Path) -> Result<()> {
    let key = load(public, format::parse_public)?;
    let params = load_params(params)?;
    let text = match (bits, input) {
        (Some(b), _) => b.to_string(),
        (None, Some(path)) => read(path)?,
        (None, None) => return Err(anyhow!("need --bits or --in").into()),
    };
    let bits = format::parse_bits(&text).context("parsing bits")?;
    let ct = dehncrypt::encrypt(&key, &params, &bits, seed)?;
    write(out, &format::write_ciphertext(&ct))?;
    println!("words={}", ct.len());
    println!("mean_len={:.1}", ct.mean_len());
    println!("max_len={}", ct.max_len());
    Ok(())
}

fn cmd_decrypt(private: &Path, input: &Path, out: Option<&Path>) -> Result<()> {
    let key = load(private, format::parse_private)?;
    let ct = load(input, format::parse_ciphertext)?;
    check_ciphertext(&ct, key.public_gens())?;
    let bits = dehncrypt::decrypt(&key, &ct)?;
    let text = format::write_bits(&bits);
    match out {
        Some(path) => write(path, &format!("{text}\n"))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn cmd_attack(kind: AttackKind, public: &Path, input: &Path, budget: &BudgetArgs) -> Result<()> {
    let key = load(public, format::parse_public)?;
    let ct = load(input, format::parse_ciphertext)?;
    check_ciphertext(&ct, key.gens())?;
    let p = &key.presentation;
    let verdicts: Vec<AttackVerdict> = match kind {
        AttackKind::Abelian => {
            let t = AbelianTest::new(p);
            ct.words.iter().map(|w| t.attack(w)).collect::<std::result::Result<_, _>>()?
        }
        AttackKind::Nilpotent2 => {
            let t = Class2Test::new(p);
            ct.words.iter().map(|w| t.attack(w)).collect::<std::result::Result<_, _>>()?
        }
        AttackKind::Enumerate => {
            let b = EnumerationBudget {
                max_factors: budget.max_factors,
                max_conj_len: budget.max_conj_len,
                max_states: budget.max_states,
            };
            ct.words.iter().map(|w| adversary::enumerate_yes(p, w, b)).collect::<std::result::Result<_, _>>()?
        }
    };
    let mut out = String::new();
    for (i, v) in verdicts.iter().enumerate() {
        let _ = writeln!(out, "word {i}: {} ({})", v.kind, v.evidence);
    }
    let count = |k| verdicts.iter().filter(|v| v.kind == k).count();
    let _ = writeln!(
        out,
        "words={} nontrivial={} certified={} inconclusive={}",
        verdicts.len(),
        count(VerdictKind::DefinitelyNonTrivial),
        count(VerdictKind::TrivialCertified),
        count(VerdictKind::Inconclusive)
    );
    print!("{out}");
    Ok(())
}

fn cmd_stats(cmd: &StatsCommand) -> Result<()> {
    match cmd {
        StatsCommand::Freq { a, b, max_sub } => {
            let a = load(a, format::parse_ciphertext)?;
            let b = load(b, format::parse_ciphertext)?;
            for row in adversary::freq_test(&a.words, &b.words, *max_sub)? {
                println!(
                    "sub_len={} statistic={:.4} dof={} cells={} p_value={:.6}",
                    row.sub_len, row.statistic, row.dof, row.cells, row.p_value
                );
            }
        }
        StatsCommand::P1 { private, length, samples, seed } => {
            let key = load(private, format::parse_private)?;
            let rate = if *length == 0 {
                0.0
            } else {
                adversary::estimate_nontrivial_rate(&key, *length, *samples, &mut Rng::new(*seed))
            };
            println!("length={length} samples={samples} rate={rate}");
        }
    }
    Ok(())
}

fn cmd_wp(presentation: &Path, word: &str) -> Result<()> {
    let p = load(presentation, format::parse_presentation)?;
    let w = format::parse_word(word, p.gens()).context("parsing --word")?;
    let solver = match DehnSolver::new(p) {
        Ok(s) => s,
        Err(WpError::NotSmallCancellation { report }) => {
            return Err(fail(4, anyhow!("presentation is not C'(1/6): {report}")));
        }
        Err(e) => return Err(e.into()),
    };
    let v = solver.word_problem(&w)?;
    println!("{} steps={}", if v.is_trivial() { "TRIVIAL" } else { "NONTRIVIAL" }, v.steps);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.cmd {
        Command::Keygen { seed, params, public, private } => cmd_keygen(*seed, params.as_deref(), public, private),
        Command::Encrypt { public, bits, input, seed, params, out } => {
            cmd_encrypt(public, bits.as_deref(), input.as_deref(), *seed, params.as_deref(), out)
        }
        Command::Decrypt { private, input, out } => cmd_decrypt(private, input, out.as_deref()),
        Command::Attack { kind, public, input, budget } => cmd_attack(*kind, public, input, budget),
        Command::Stats(cmd) => cmd_stats(cmd),
        Command::Wp { presentation, word } => cmd_wp(presentation, word),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}
