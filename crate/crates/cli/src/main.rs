use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_traits::{One, Signed, Zero};

use torfol::document::{format_rational, parse, FanDoc, TraceDoc};
use torfol::fan::FanData;
use torfol::foliation::{
    c1_from_filtration, canonical_divisor, conormal_filtration, curve_tangent, dicritical_witness,
    foliation_filtration, singular_locus, FoliationDatum,
};
use torfol::mori::{
    classify_contraction, extremal_rays, flip_walls, kf_dot, run_mmp, wall_relation, MmpOptions,
    MmpOutcome, Pick,
};
use torfol::singclass::{classify, SingularityReport, Verdict};
use torfol::verify::verify_all;
use torfol::{Error, Rat};

#[derive(Parser)]
#[command(
    name = "torfol",
    version,
    about = "Toric foliations on simplicial fans, computed exactly"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Canonical divisor, filtrations, singular locus, dicriticality and singularity class.
    Analyze { file: PathBuf },
    /// Terminal/canonical classification. Exit code 0 terminal, 10 canonical, 20 not canonical.
    Classify { file: PathBuf },
    /// Extremal rays of the cone of curves with K_F-degrees and tangency.
    Extremal { file: PathBuf },
    /// Run the foliated MMP.
    Mmp {
        file: PathBuf,
        #[arg(long, default_value_t = 1000)]
        max_flips: usize,
        /// `lex`, or `wall=K1,K2,...` to pick the extremal ray through interior wall K_s at step s.
        #[arg(long, default_value = "lex")]
        pick: String,
        /// Run even when the singularities are worse than canonical.
        #[arg(long)]
        allow_noncanonical: bool,
        /// Write the machine-readable trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Flip one wall, given by its ray indices, on any fan.
    FlipWall {
        file: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        wall: Vec<usize>,
    },
    /// Run the independent oracles on the input.
    Verify { file: PathBuf },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_)
            | Error::InvalidFan(_)
            | Error::InvalidFoliation(_)
            | Error::DimensionMismatch(_)
            | Error::NotPrimitive(_)
            | Error::InvalidPick(_)
            | Error::NoSuchWall(_) => 1,
            Error::FlipCapExceeded(_) => 3,
            Error::InconsistentFlip(_) => 4,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn load(path: &Path) -> Result<(FanData, FoliationDatum), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure {
        code: 1,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    parse(&text).map_err(|e| {
        let mut f = Failure::from(e.clone());
        if let Error::InvalidFan(vs) = e {
            f.message = std::iter::once("invalid fan:".to_string())
                .chain(vs.iter().map(|v| format!("  {v}")))
                .collect::<Vec<_>>()
                .join("\n");
        }
        f
    })
}

fn q(x: &Rat) -> String {
    format_rational(x)
}

fn tuple<T: std::fmt::Display>(xs: &[T]) -> String {
    format!(
        "({})",
        xs.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    )
}

/// Renders `-v0 - v1 + 1/2*v3`.
fn combination(coeffs: &[Rat], rays: &[usize]) -> String {
    let mut out = String::new();
    for (a, r) in coeffs.iter().zip(rays) {
        if a.is_zero() {
            continue;
        }
        let mag = a.abs();
        let sign = if a.is_negative() { "-" } else { "+" };
        if out.is_empty() {
            if a.is_negative() {
                out.push('-');
            }
        } else {
            out.push_str(&format!(" {sign} "));
        }
        if !mag.is_one() {
            out.push_str(&format!("{}*", q(&mag)));
        }
        out.push_str(&format!("v{r}"));
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

fn print_report(rep: &SingularityReport) {
    println!("singularities: {}", rep.verdict);
    for c in &rep.cones {
        println!("  cone {:?}: {}", c.cone, c.verdict);
    }
    if let Some(w) = &rep.witness {
        println!(
            "  witness: {} in cone {:?}, discrepancy {}",
            tuple(&w.point),
            w.cone,
            q(&w.discrepancy)
        );
    }
}

fn analyze(path: &Path) -> Outcome {
    let (fan, v) = load(path)?;
    println!("K_F = {}", canonical_divisor(&fan, &v));
    println!("foliation filtration jumps:");
    let phi = foliation_filtration(&fan, &v);
    for (i, jumps) in phi.per_ray.iter().enumerate() {
        let js: Vec<String> = jumps
            .iter()
            .map(|j| {
                let span: Vec<String> = j.basis.iter().map(|b| tuple(b)).collect();
                format!("{} -> span{{{}}}", j.index, span.join(", "))
            })
            .collect();
        println!("  ray {i}: {}", js.join(", "));
    }
    println!(
        "c1(conormal) = {}",
        c1_from_filtration(&conormal_filtration(&fan, &v))
    );
    let sing = singular_locus(&fan, &v);
    if sing.is_empty() {
        println!("singular locus: empty");
    } else {
        println!("singular locus: orbit closures of {:?}", sing.minimal);
    }
    match dicritical_witness(&fan, &v) {
        Some(w) => println!(
            "dicritical: yes (ray {} over cone {:?})",
            tuple(&w.ray),
            w.cone
        ),
        None => println!("dicritical: no"),
    }
    print_report(&classify(&fan, &v)?);
    Ok(0)
}

fn classify_cmd(path: &Path) -> Outcome {
    let (fan, v) = load(path)?;
    let rep = classify(&fan, &v)?;
    print_report(&rep);
    Ok(match rep.verdict {
        Verdict::Terminal => 0,
        Verdict::CanonicalNotTerminal => 10,
        Verdict::NotCanonical => 20,
    })
}

fn extremal(path: &Path) -> Outcome {
    let (fan, v) = load(path)?;
    for (k, r) in extremal_rays(&fan)?.iter().enumerate() {
        let kf = kf_dot(&fan, &v, r.representative())?;
        let kind = match classify_contraction(&fan, &v, r) {
            Ok(kind) => kind.to_string(),
            Err(Error::NotNegative(_)) => "-".to_string(),
            Err(e) => return Err(e.into()),
        };
        println!(
            "class {k}: direction {}, K_F.C = {}, contraction {kind}",
            tuple(&r.direction),
            q(&kf)
        );
        for w in &r.walls {
            let tangent = curve_tangent(&fan, &v, w)?;
            println!(
                "  wall {:?}: {}",
                w.rays,
                if tangent { "tangent" } else { "not tangent" }
            );
        }
    }
    Ok(0)
}

fn parse_pick(s: &str) -> Result<Pick, Failure> {
    if s == "lex" {
        return Ok(Pick::Lex);
    }
    let bad = || Failure {
        code: 1,
        message: format!("--pick expects `lex` or `wall=K1,K2,...`, got {s:?}"),
    };
    let list = s.strip_prefix("wall=").ok_or_else(bad)?;
    if list.is_empty() {
        // a trace without steps replays as an empty pick list
        return Ok(Pick::Walls(Vec::new()));
    }
    list.split(',')
        .map(|k| k.trim().parse::<usize>().map_err(|_| bad()))
        .collect::<Result<Vec<_>, _>>()
        .map(Pick::Walls)
}

fn mmp(path: &Path, opts: MmpOptions, trace_path: Option<&Path>) -> Outcome {
    let (fan, v) = load(path)?;
    let trace = run_mmp(&fan, &v, &opts)?;
    if trace.canonical_override {
        println!("warning: input is not canonical; running because of --allow-noncanonical");
    }
    println!(
        "{:<5} {:<16} {:<12} {:<8} {:<10} dicritical",
        "step", "kind", "wall", "K_F.C", "picard"
    );
    for (i, s) in trace.steps.iter().enumerate() {
        let after = match s.dicritical_after {
            Some(true) => "yes",
            Some(false) => "no",
            None => "-",
        };
        println!(
            "{:<5} {:<16} {:<12} {:<8} {:<10} {} -> {after}",
            i,
            s.kind.to_string(),
            format!("{:?}", s.wall.rays),
            q(&s.kf_dot),
            format!("{} -> {}", s.picard_before, s.picard_after),
            if s.dicritical_before { "yes" } else { "no" },
        );
    }
    match &trace.outcome {
        MmpOutcome::KfNef => println!("outcome: K_F nef"),
        MmpOutcome::Fibration {
            contraction,
            pullback,
        } => {
            println!(
                "outcome: fibration onto a rank-{} toric variety ({} rays)",
                contraction.fan.rank(),
                contraction.fan.num_rays()
            );
            if let Some(p) = pullback {
                println!(
                    "pullback: quotient along the rays {:?} to rank {}, induced foliation of dimension {}{}",
                    p.rays_in_v,
                    p.quotient.fan.rank(),
                    p.induced.len(),
                    if p.quotient.report.is_fan() { "" } else { " (image is not a fan)" }
                );
            }
        }
    }
    println!(
        "final fan: {} rays, {} maximal cones",
        trace.final_fan.num_rays(),
        trace.final_fan.cones().len()
    );
    if let Some(out) = trace_path {
        std::fs::write(out, TraceDoc::of(&trace).to_toml()).map_err(|e| Failure {
            code: 1,
            message: format!("cannot write {}: {e}", out.display()),
        })?;
    }
    if !trace.consistency_failures.is_empty() {
        for f in &trace.consistency_failures {
            eprintln!("consistency failure: {f}");
        }
        return Ok(4);
    }
    Ok(0)
}

fn flip_wall(path: &Path, rays: &[usize]) -> Outcome {
    let (fan, v) = load(path)?;
    let mut key = rays.to_vec();
    key.sort_unstable();
    let wall = fan
        .walls()
        .into_iter()
        .find(|w| w.rays == key)
        .ok_or_else(|| Failure {
            code: 1,
            message: format!("{key:?} is not a wall of the fan"),
        })?;
    let rel = wall_relation(&fan, &wall)?;
    println!(
        "wall {:?}: relation {} = 0",
        wall.rays,
        combination(&rel.coeffs, &rel.rays)
    );
    println!("K_F.C = {}", q(&kf_dot(&fan, &v, &wall)?));
    let before = dicritical_witness(&fan, &v).is_some();
    let flipped = flip_walls(&fan, &[wall])?;
    println!("flipped cones: {:?}", flipped.cones());
    for w in flipped.interior_walls() {
        if w.rays.iter().all(|r| rel.rays.contains(r)) && w.sides.len() == 2 {
            let fresh = w
                .sides
                .iter()
                .all(|&c| !fan.cones().contains(&flipped.cones()[c]));
            if fresh {
                println!(
                    "K_F+.C+ = {} at wall {:?}",
                    q(&kf_dot(&flipped, &v, &w)?),
                    w.rays
                );
            }
        }
    }
    let after = singular_locus(&flipped, &v);
    let yes_no = |b: bool| if b { "dicritical" } else { "non-dicritical" };
    println!(
        "{} -> {}{}",
        yes_no(before),
        yes_no(dicritical_witness(&flipped, &v).is_some()),
        if after.is_empty() {
            " (singular locus empty)"
        } else {
            ""
        }
    );
    print!("{}", FanDoc::of(&flipped).to_toml());
    Ok(0)
}

fn verify(path: &Path) -> Outcome {
    let (fan, v) = load(path)?;
    let mut failed = false;
    for c in verify_all(&fan, &v)? {
        let status = if c.failures.is_empty() {
            "ok"
        } else {
            "FAILED"
        };
        println!("{status:<6} {} ({} checks)", c.name, c.checked);
        for f in &c.failures {
            println!("       {f}");
        }
        failed |= !c.failures.is_empty();
    }
    Ok(if failed { 4 } else { 0 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze { file } => analyze(file),
        Command::Classify { file } => classify_cmd(file),
        Command::Extremal { file } => extremal(file),
        Command::Mmp {
            file,
            max_flips,
            pick,
            allow_noncanonical,
            trace,
        } => parse_pick(pick).and_then(|pick| {
            let opts = MmpOptions {
                max_flips: *max_flips,
                pick,
                allow_noncanonical: *allow_noncanonical,
            };
            mmp(file, opts, trace.as_deref())
        }),
        Command::FlipWall { file, wall } => flip_wall(file, wall),
        Command::Verify { file } => verify(file),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
