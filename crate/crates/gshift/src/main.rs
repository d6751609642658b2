use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use gshift::cayley::{build_ball_automaton, finite_representation, is_finite_representation};
use gshift::combinatorics::{
    char_poly_from_xi, char_poly_trace_recursion, partition_check, xi_sequence,
    DEFAULT_PERIODIC_CAP,
};
use gshift::degree::{
    build_snre, degree_from_snre, enumerate_simple_subsystems, DegreeResult,
    DEFAULT_SUBSYSTEM_CAP,
};
use gshift::followers::{degree_on_automaton_capped, follower_classes};
use gshift::problem::ProblemFile;
use gshift::sft::{
    count_blocks_oracle, count_blocks_oracle_automaton, count_blocks_recurrence,
    count_blocks_recurrence_automaton, essential_symbols, essential_symbols_automaton,
    BlockCountVector, DEFAULT_LABELING_CAP,
};
use gshift::spectrum::{spectrum_general, spectrum_k2, SpectrumSet, SpectrumWitness, DEFAULT_SPECTRUM_CAP};
use gshift::{Error, MonoidPresentation};

#[derive(Parser)]
#[command(name = "gshift", version, about = "Degrees of shifts of finite type on matrix-presented monoids")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// JSON problem file
    file: PathBuf,
    /// machine-readable output
    #[arg(long)]
    json: bool,
    /// write a Graphviz rendering of the underlying graph
    #[arg(long, value_name = "PATH")]
    dot: Option<PathBuf>,
    /// worker threads (accepted for compatibility; output is identical)
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// resource cap for the command's enumeration
    #[arg(long, value_name = "M")]
    cap: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate the input and report basic monoid facts
    Check(Common),
    /// Compare the two characteristic-polynomial routes
    Charpoly(Common),
    /// Verify the periodic-word partition at a given length
    Partition {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
        /// list the words of every part
        #[arg(long)]
        enumerate: bool,
    },
    /// Count n-blocks by root label
    Count {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
        /// cross-check against brute-force enumeration
        #[arg(long)]
        oracle: bool,
    },
    /// Report essential and dying labels
    Essential(Common),
    /// Compute the topological degree
    Degree {
        #[command(flatten)]
        common: Common,
        /// force the state-indexed route even for presentations
        #[arg(long)]
        automaton: bool,
    },
    /// Enumerate the attainable degrees
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: Option<usize>,
        /// use the block-matrix family instead of the two-letter form
        #[arg(long)]
        general: bool,
    },
}

/// Round to 12 significant digits for stable reporting.
fn sig12(x: f64) -> f64 {
    format!("{x:.11e}").parse().unwrap()
}

fn counts_json(v: &BlockCountVector) -> serde_json::Value {
    json!(v.counts().iter().map(|c| c.to_string()).collect::<Vec<_>>())
}

fn counts_human(v: &BlockCountVector) -> String {
    let parts: Vec<String> = v.counts().iter().map(|c| c.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

enum Input {
    Presentation(MonoidPresentation),
    Automaton(gshift::FollowerAutomaton),
}

fn load(common: &Common) -> Result<(ProblemFile, Input), Error> {
    let file = ProblemFile::from_path(&common.file)?;
    let input = if let Some(p) = file.presentation()? {
        Input::Presentation(p)
    } else {
        Input::Automaton(file.automaton()?.expect("validated"))
    };
    Ok((file, input))
}

fn need_presentation(input: &Input) -> Result<&MonoidPresentation, Error> {
    match input {
        Input::Presentation(p) => Ok(p),
        Input::Automaton(_) => Err(Error::InvalidInput(
            "this command needs a presentation, not an automaton".into(),
        )),
    }
}

fn write_dot(common: &Common, input: &Input) -> Result<(), Error> {
    let Some(path) = &common.dot else { return Ok(()) };
    let dot = match input {
        Input::Presentation(p) => {
            if is_finite_representation(p) {
                finite_representation(p)?.to_dot()
            } else {
                return Err(Error::InvalidInput(
                    "no finite representation to render".into(),
                ));
            }
        }
        Input::Automaton(aut) => build_ball_automaton(aut, 3, 100_000)?.to_dot(),
    };
    std::fs::write(path, dot).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn cmd_check(common: &Common) -> Result<(), Error> {
    let (_, input) = load(common)?;
    write_dot(common, &input)?;
    match &input {
        Input::Presentation(p) => {
            let finite = is_finite_representation(p);
            let xi = xi_sequence(p);
            let free: Vec<usize> = p.right_free_generators().iter().map(|s| s.index()).collect();
            let classes = finite.then(|| finite_representation(p).map(|f| f.vertices().len()));
            let classes = match classes {
                Some(r) => Some(r?),
                None => None,
            };
            if common.json {
                println!(
                    "{}",
                    json!({
                        "d": p.d(),
                        "right_free": free,
                        "finite": finite,
                        "xi": xi.values(),
                        "classes": classes,
                        "warning": (!finite).then_some("no finite representation"),
                    })
                );
            } else {
                let free_str: Vec<String> = free.iter().map(|i| i.to_string()).collect();
                print!(
                    "d={}, S_R={{{}}}, finite: {}, xi={:?}",
                    p.d(),
                    free_str.join(","),
                    if finite { "yes" } else { "no" },
                    xi.values()
                );
                match classes {
                    Some(c) => println!(", |V_F|={c}"),
                    None => println!(" (warning: no finite representation)"),
                }
            }
        }
        Input::Automaton(aut) => {
            if common.json {
                println!(
                    "{}",
                    json!({
                        "states": aut.num_states(),
                        "d": aut.d(),
                        "initial": aut.state_name(aut.initial()),
                    })
                );
            } else {
                println!(
                    "automaton: {} states, d={}, initial {}",
                    aut.num_states(),
                    aut.d(),
                    aut.state_name(aut.initial())
                );
            }
        }
    }
    Ok(())
}

fn cmd_charpoly(common: &Common) -> Result<(), Error> {
    let (_, input) = load(common)?;
    let p = need_presentation(&input)?;
    if !is_finite_representation(p) {
        return Err(Error::InfiniteRepresentation);
    }
    write_dot(common, &input)?;
    let xi = xi_sequence(p);
    let from_xi = char_poly_from_xi(&xi);
    let from_traces = char_poly_trace_recursion(p.matrix())?;
    let verified = from_xi == from_traces;
    if common.json {
        println!(
            "{}",
            json!({
                "xi": xi.values(),
                "coeffs": from_xi.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "verified": verified,
            })
        );
    } else {
        println!("xi = {:?}", xi.values());
        println!("char poly = {}", from_xi.to_string_pretty());
        println!("{}", if verified { "VERIFIED" } else { "FAILED" });
    }
    Ok(())
}

fn cmd_partition(common: &Common, n: usize, enumerate: bool) -> Result<(), Error> {
    let (_, input) = load(common)?;
    let p = need_presentation(&input)?;
    write_dot(common, &input)?;
    let cap = common.cap.map_or(DEFAULT_PERIODIC_CAP, |c| c as usize);
    let report = partition_check(p, n, cap)?;
    if common.json {
        println!(
            "{}",
            json!({
                "n": report.n,
                "trace": report.trace.to_string(),
                "sets_partition": report.sets_partition,
                "numeric_identity": report.numeric_identity,
                "parts": report.parts.iter()
                    .map(|(name, len)| json!({"name": name, "size": len}))
                    .collect::<Vec<_>>(),
            })
        );
    } else {
        println!("|P_{}| = tr(A^{}) = {}", report.n, report.n, report.trace);
        for (name, len) in &report.parts {
            println!("  {name}: {len} words");
        }
        if enumerate {
            use gshift::combinatorics::{enumerate_xi, insertions, periodic_words, translates};
            let mut families = vec![(format!("T(Xi_{n})"), translates(&enumerate_xi(p, n)?))];
            for i in 1..n {
                families.push((
                    format!("L(P_{}, Xi_{})", n - i, i),
                    insertions(p, &periodic_words(p, n - i, cap)?, &enumerate_xi(p, i)?)?,
                ));
            }
            for (name, fam) in families {
                let words: Vec<String> = fam
                    .words()
                    .map(|w| gshift::Word::new(w.clone()).to_string())
                    .collect();
                println!("  {name} = {{{}}}", words.join(", "));
            }
        }
        println!(
            "partition: {}, numeric identity: {}",
            if report.sets_partition { "OK" } else { "FAILED" },
            if report.numeric_identity { "OK" } else { "FAILED" }
        );
    }
    Ok(())
}

fn cmd_count(common: &Common, n: usize, oracle: bool) -> Result<(), Error> {
    let (file, input) = load(common)?;
    write_dot(common, &input)?;
    let cap = common.cap.unwrap_or(DEFAULT_LABELING_CAP);
    let (recurrence, oracle_counts) = match &input {
        Input::Presentation(p) => {
            let r = file.rules_required(p.d())?;
            (
                count_blocks_recurrence(p, &r, n)?,
                oracle.then(|| count_blocks_oracle(p, &r, n, cap)).transpose()?,
            )
        }
        Input::Automaton(aut) => {
            let r = file.rules_required(aut.d())?;
            (
                count_blocks_recurrence_automaton(aut, &r, n)?,
                oracle
                    .then(|| count_blocks_oracle_automaton(aut, &r, n, cap))
                    .transpose()?,
            )
        }
    };
    let verdict = oracle_counts.as_ref().map(|o| o == &recurrence);
    if common.json {
        println!(
            "{}",
            json!({
                "n": n,
                "recurrence": counts_json(&recurrence),
                "oracle": oracle_counts.as_ref().map(counts_json),
                "match": verdict,
            })
        );
    } else {
        println!("recurrence: {}", counts_human(&recurrence));
        if let Some(o) = &oracle_counts {
            println!("oracle:     {}", counts_human(o));
            println!("{}", if verdict == Some(true) { "MATCH" } else { "MISMATCH" });
        }
    }
    Ok(())
}

fn cmd_essential(common: &Common) -> Result<(), Error> {
    let (file, input) = load(common)?;
    write_dot(common, &input)?;
    let e = match &input {
        Input::Presentation(p) => essential_symbols(p, &file.rules_required(p.d())?)?,
        Input::Automaton(aut) => essential_symbols_automaton(aut, &file.rules_required(aut.d())?)?,
    };
    let dead: Vec<usize> = (0..e.k()).filter(|&i| e.is_dead(i)).map(|i| i + 1).collect();
    if common.json {
        println!("{}", json!({"essential": e.to_one_based(), "dead": dead}));
    } else {
        println!("essential = {:?}, dead = {dead:?}", e.to_one_based());
    }
    Ok(())
}

fn degree_json(res: &DegreeResult) -> serde_json::Value {
    json!({
        "degree": sig12(res.degree),
        "lambda": sig12(res.spectral_radius),
        "essential": res.essential,
        "full_degree": res.full_degree,
        "witness": res.witness.as_ref().map(|(_, m)| m),
    })
}

fn print_degree_human(res: &DegreeResult) {
    println!("essential symbols: {:?}", res.essential);
    println!("degree = {}", sig12(res.degree));
    println!("rho = {}", sig12(res.spectral_radius));
    if let Some((_, m)) = &res.witness {
        println!("witness matrix: {m:?}");
    }
    println!("full degree: {}", if res.full_degree { "yes" } else { "no" });
}

fn cmd_degree(common: &Common, force_automaton: bool) -> Result<(), Error> {
    let (file, input) = load(common)?;
    write_dot(common, &input)?;
    let cap = common.cap.map_or(DEFAULT_SUBSYSTEM_CAP, |c| c as u128);
    match (&input, force_automaton) {
        (Input::Presentation(p), false) => {
            let r = file.rules_required(p.d())?;
            let e = essential_symbols(p, &r)?;
            let snre = build_snre(p, &r, &e)?;
            let res = degree_from_snre(&snre, cap)?;
            if common.json {
                println!("{}", degree_json(&res));
            } else {
                let count = enumerate_simple_subsystems(&snre, cap)?.len();
                println!("l = {}, xi = {:?}", snre.max_lag(), snre.xi());
                println!("simple subsystems after dedup: {count}");
                print_degree_human(&res);
            }
        }
        (Input::Presentation(p), true) => {
            let r = file.rules_required(p.d())?;
            let res = degree_on_automaton_capped(&follower_classes(p), &r, cap)?;
            if common.json {
                println!("{}", degree_json(&res));
            } else {
                print_degree_human(&res);
            }
        }
        (Input::Automaton(aut), _) => {
            let r = file.rules_required(aut.d())?;
            let res = degree_on_automaton_capped(aut, &r, cap)?;
            if common.json {
                println!("{}", degree_json(&res));
            } else {
                print_degree_human(&res);
            }
        }
    }
    Ok(())
}

fn spectrum_json(set: &SpectrumSet) -> serde_json::Value {
    json!(set
        .entries()
        .iter()
        .map(|e| {
            let witness = match &e.witness {
                SpectrumWitness::Alpha(a) => json!({"alpha": a}),
                SpectrumWitness::Blocks(b) => json!({"blocks": b}),
            };
            json!({"degree": sig12(e.degree), "lambda": sig12(e.lambda), "witness": witness})
        })
        .collect::<Vec<_>>())
}

fn cmd_spectrum(common: &Common, k: Option<usize>, general: bool) -> Result<(), Error> {
    let (_, input) = load(common)?;
    let p = need_presentation(&input)?;
    write_dot(common, &input)?;
    let set = if general {
        let cap = common.cap.map_or(DEFAULT_SPECTRUM_CAP, |c| c as u128);
        spectrum_general(p, k.unwrap_or(2), cap)?
    } else {
        spectrum_k2(p)?
    };
    if common.json {
        println!("{}", spectrum_json(&set));
    } else {
        for e in set.entries() {
            let witness = match &e.witness {
                SpectrumWitness::Alpha(a) => format!("alpha={a:?}"),
                SpectrumWitness::Blocks(b) => format!("blocks={b:?}"),
            };
            println!("degree = {} (lambda = {}, {witness})", sig12(e.degree), sig12(e.lambda));
        }
    }
    Ok(())
}

fn run() -> Result<(), Error> {
    match &Cli::parse().cmd {
        Cmd::Check(c) => cmd_check(c),
        Cmd::Charpoly(c) => cmd_charpoly(c),
        Cmd::Partition { common, n, enumerate } => cmd_partition(common, *n, *enumerate),
        Cmd::Count { common, n, oracle } => cmd_count(common, *n, *oracle),
        Cmd::Essential(c) => cmd_essential(c),
        Cmd::Degree { common, automaton } => cmd_degree(common, *automaton),
        Cmd::Spectrum { common, k, general } => cmd_spectrum(common, *k, *general),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::ResourceCap(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
