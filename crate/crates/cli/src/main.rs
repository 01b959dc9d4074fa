//! `jetvar` — compute Euler-Lagrange expressions, test local
//! variationality, and run the exact identity suites of the jet calculus.
//!
//! ```text
//! jetvar el <file> [--reduce]   Euler-Lagrange expressions
//! jetvar check <file>           Helmholtz-Sonin test of an equation
//! jetvar reduce <file>          homogeneity reduction of a Lagrangian
//! jetvar suite <names...>       named identity suites
//! ```
//!
//! Common flags: `--format text|structured`, `--max-order <cap>`,
//! `--n --m --r --seed --samples`, `--lagrangian <expr>` (suite souriau).

mod output;
mod problem;

use jetvar_core::chart::ChartSide;
use jetvar_core::expr::{parse, Expr};
use jetvar_core::report::Report;
use jetvar_core::suites::{run_suite, SuiteParams, SUITE_NAMES};
use jetvar_core::variational::{
    euler_lagrange, euler_lagrange_hom, helmholtz, hom_equation_reduce, is_homogeneous,
    is_locally_variational, reduce, AdaptedLagrangian, HomLagrangian, SourceEquation,
};
use output::{OutputDoc, OutputFormat};
use problem::ProblemSpec;
use std::process::ExitCode;
use std::time::Instant;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&args) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

struct CommonFlags {
    format: OutputFormat,
    max_order: usize,
    n: u16,
    m: u16,
    r: usize,
    seed: u64,
    samples: usize,
    reduce: bool,
    lagrangian: Option<String>,
    positional: Vec<String>,
}

fn parse_flags(args: &[String]) -> Result<CommonFlags, String> {
    let mut flags = CommonFlags {
        format: OutputFormat::Text,
        max_order: 3,
        n: 1,
        m: 1,
        r: 1,
        seed: 0,
        samples: 25,
        reduce: false,
        lagrangian: None,
        positional: Vec::new(),
    };
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let mut grab = |name: &str| -> Result<String, String> {
            it.next()
                .cloned()
                .ok_or_else(|| format!("flag {name} needs a value"))
        };
        match arg.as_str() {
            "--format" => {
                flags.format = match grab("--format")?.as_str() {
                    "text" => OutputFormat::Text,
                    "structured" => OutputFormat::Structured,
                    other => return Err(format!("unknown format `{other}`")),
                }
            }
            "--max-order" => {
                flags.max_order = grab("--max-order")?
                    .parse()
                    .map_err(|_| "bad --max-order".to_string())?
            }
            "--n" => flags.n = grab("--n")?.parse().map_err(|_| "bad --n".to_string())?,
            "--m" => flags.m = grab("--m")?.parse().map_err(|_| "bad --m".to_string())?,
            "--r" => flags.r = grab("--r")?.parse().map_err(|_| "bad --r".to_string())?,
            "--seed" => {
                flags.seed = grab("--seed")?.parse().map_err(|_| "bad --seed".to_string())?
            }
            "--samples" => {
                flags.samples = grab("--samples")?
                    .parse()
                    .map_err(|_| "bad --samples".to_string())?
            }
            "--lagrangian" => flags.lagrangian = Some(grab("--lagrangian")?),
            "--reduce" => flags.reduce = true,
            other if other.starts_with("--") => {
                return Err(format!("unknown flag `{other}`"));
            }
            other => flags.positional.push(other.to_string()),
        }
    }
    Ok(flags)
}

const USAGE: &str = "usage: jetvar <el|check|reduce|suite> ...
  jetvar el <file> [--reduce] [--format text|structured] [--max-order N]
  jetvar check <file> [--format ...]
  jetvar reduce <file> [--format ...]
  jetvar suite <names...> [--n N] [--m M] [--r R] [--seed S] [--samples K]
                          [--lagrangian EXPR] [--format ...]
suites: group-axioms invariants chart-change ibp hom-correspondence
        hs-correspondence souriau";

fn run(args: &[String]) -> Result<ExitCode, String> {
    let Some((command, rest)) = args.split_first() else {
        return Err(USAGE.to_string());
    };
    let flags = parse_flags(rest)?;
    let started = Instant::now();
    let (doc, failed) = match command.as_str() {
        "el" => cmd_el(&flags)?,
        "check" => cmd_check(&flags)?,
        "reduce" => cmd_reduce(&flags)?,
        "suite" => cmd_suite(&flags)?,
        other => return Err(format!("unknown command `{other}`\n{USAGE}")),
    };
    print!("{}", doc.render(flags.format, started.elapsed()));
    Ok(if failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn load_problem(flags: &CommonFlags) -> Result<ProblemSpec, String> {
    let Some(path) = flags.positional.first() else {
        return Err(format!("missing problem file\n{USAGE}"));
    };
    let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
    let spec = ProblemSpec::parse(&text).map_err(|e| format!("{path}: {e}"))?;
    spec.validate(flags.max_order).map_err(|e| format!("{path}: {e}"))?;
    Ok(spec)
}

fn render_equation(doc: &mut OutputDoc, label: &str, comps: &[Expr]) {
    for (k, e) in comps.iter().enumerate() {
        doc.kv(&format!("{label}_{}", k + 1), &format!("{e}"));
    }
}

fn cmd_el(flags: &CommonFlags) -> Result<(OutputDoc, bool), String> {
    let spec = load_problem(flags)?;
    let lag_text = spec
        .lagrangian
        .as_ref()
        .ok_or("el: problem file has no lagrangian")?;
    let chart = spec.chart_spec();
    let lag = parse(lag_text, &chart).map_err(|e| e.to_string())?;
    let mut doc = OutputDoc::new("el");
    spec.echo_into(&mut doc);
    match chart.side {
        ChartSide::Adapted => {
            let eq = euler_lagrange(&AdaptedLagrangian {
                expr: lag,
                n: spec.n,
                m: spec.m,
                r: spec.r,
            })
            .map_err(|e| e.to_string())?;
            render_equation(&mut doc, "E", &eq.components);
            curve_residuals(&mut doc, &spec, &eq)?;
        }
        _ => {
            let hom = HomLagrangian { expr: lag.clone(), n: spec.n, m: spec.m, r: spec.r };
            let eq = euler_lagrange_hom(&hom).map_err(|e| e.to_string())?;
            render_equation(&mut doc, "E", &eq.components);
            if flags.reduce {
                let reduced = reduce(&hom).map_err(|e| e.to_string())?;
                doc.kv("L", &format!("{}", reduced.expr));
                let red_eq = euler_lagrange(&reduced).map_err(|e| e.to_string())?;
                for (k, e) in red_eq.components.iter().enumerate() {
                    doc.kv(&format!("reduced E_{}", k + 1), &format!("{e}"));
                }
            }
        }
    }
    Ok((doc, false))
}

fn curve_residuals(
    doc: &mut OutputDoc,
    spec: &ProblemSpec,
    eq: &SourceEquation,
) -> Result<(), String> {
    for (idx, curve) in spec.curves.iter().enumerate() {
        let comps = spec.parse_curve(curve).map_err(|e| e.to_string())?;
        let jet = jetvar_core::jetgroup::prolong_immersion_symbolic(&comps, spec.n, eq.order)
            .map_err(|e| e.to_string())?;
        let adapted = jetvar_core::grassmann::invariants(&jet).map_err(|e| e.to_string())?;
        let subst = adapted.substitution();
        let mut solves = true;
        for comp in &eq.components {
            let along = comp.subst(&subst).map_err(|e| e.to_string())?;
            if !along.is_zero() {
                solves = false;
            }
        }
        doc.kv(
            &format!("curve_{} solves the equations", idx + 1),
            if solves { "yes" } else { "no" },
        );
    }
    Ok(())
}

fn cmd_check(flags: &CommonFlags) -> Result<(OutputDoc, bool), String> {
    let spec = load_problem(flags)?;
    if spec.equation.is_empty() {
        return Err("check: problem file has no equation".into());
    }
    let chart = spec.chart_spec();
    let comps: Vec<Expr> = spec
        .equation
        .iter()
        .map(|t| parse(t, &chart))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let expected = match chart.side {
        ChartSide::Adapted => spec.m as usize,
        _ => (spec.n + spec.m) as usize,
    };
    if comps.len() != expected {
        return Err(format!(
            "check: expected {expected} equation components, found {}",
            comps.len()
        ));
    }
    let order = comps.iter().map(|c| c.jet_order()).max().unwrap_or(1).max(1);
    let eq = match chart.side {
        ChartSide::Adapted => SourceEquation::adapted(comps, spec.n, spec.m, order),
        _ => SourceEquation::homogeneous(comps, spec.n, spec.m, order),
    };
    let mut doc = OutputDoc::new("check");
    spec.echo_into(&mut doc);
    let tensor = helmholtz(&eq).map_err(|e| e.to_string())?;
    let mut nonzero = 0usize;
    for ((a, b, idx), value) in &tensor.components {
        if !value.is_zero() {
            nonzero += 1;
            let digits: String = idx.entries().iter().map(|d| d.to_string()).collect();
            let sup = if digits.is_empty() { String::new() } else { format!("^{digits}") };
            doc.kv(&format!("H{sup}_{a}{b}"), &format!("{value}"));
        }
    }
    if nonzero == 0 {
        doc.kv("H", "0");
    }
    let verdict = is_locally_variational(&eq).map_err(|e| e.to_string())?;
    doc.kv("variational", if verdict { "yes" } else { "no" });
    if chart.side == ChartSide::Homogeneous {
        match hom_equation_reduce(&eq) {
            Ok(adapted) => render_equation(&mut doc, "T", &adapted.components),
            Err(e) => doc.kv("reduction", &e.to_string()),
        }
    }
    Ok((doc, false))
}

fn cmd_reduce(flags: &CommonFlags) -> Result<(OutputDoc, bool), String> {
    let spec = load_problem(flags)?;
    let lag_text = spec
        .lagrangian
        .as_ref()
        .ok_or("reduce: problem file has no lagrangian")?;
    let chart = spec.chart_spec();
    if chart.side != ChartSide::Homogeneous {
        return Err("reduce: the problem chart must be homogeneous".into());
    }
    let lag = parse(lag_text, &chart).map_err(|e| e.to_string())?;
    let mut doc = OutputDoc::new("reduce");
    spec.echo_into(&mut doc);
    let homogeneous =
        is_homogeneous(&lag, spec.n, spec.m, spec.r).map_err(|e| e.to_string())?;
    doc.kv("homogeneous", if homogeneous { "yes" } else { "no" });
    if !homogeneous {
        return Ok((doc, true));
    }
    let hom = HomLagrangian { expr: lag, n: spec.n, m: spec.m, r: spec.r };
    let reduced = reduce(&hom).map_err(|e| e.to_string())?;
    doc.kv("L", &format!("{}", reduced.expr));
    Ok((doc, false))
}

fn cmd_suite(flags: &CommonFlags) -> Result<(OutputDoc, bool), String> {
    if flags.positional.is_empty() {
        return Err(format!(
            "suite: name at least one suite of {}",
            SUITE_NAMES.join(", ")
        ));
    }
    // a single positional naming an existing problem file supplies the
    // suite list and parameters
    let mut names = flags.positional.clone();
    let mut params = SuiteParams {
        n: flags.n,
        m: flags.m,
        r: flags.r,
        seed: flags.seed,
        samples: flags.samples,
        lagrangian: flags.lagrangian.clone(),
    };
    if names.len() == 1 && std::path::Path::new(&names[0]).is_file() {
        let text = std::fs::read_to_string(&names[0]).map_err(|e| e.to_string())?;
        let spec = ProblemSpec::parse(&text).map_err(|e| format!("{}: {e}", names[0]))?;
        spec.validate(flags.max_order).map_err(|e| format!("{}: {e}", names[0]))?;
        if spec.suites.is_empty() {
            return Err(format!("{}: problem file names no suites", names[0]));
        }
        names = spec.suites.clone();
        params.n = spec.n;
        params.m = spec.m;
        params.r = spec.r;
        params.seed = spec.seed;
        params.samples = spec.samples;
        if params.lagrangian.is_none() {
            params.lagrangian = spec.lagrangian.clone();
        }
    }
    let mut doc = OutputDoc::new("suite");
    doc.kv("n", &params.n.to_string());
    doc.kv("m", &params.m.to_string());
    doc.kv("r", &params.r.to_string());
    doc.kv("seed", &params.seed.to_string());
    doc.kv("samples", &params.samples.to_string());
    let mut combined = Report::new();
    for name in &names {
        let report = run_suite(name, &params).map_err(|e| e.to_string())?;
        doc.report(name, &report);
        combined.extend(report);
    }
    let failed = !combined.all_passed();
    doc.kv("passed", &combined.items.iter().filter(|i| i.passed).count().to_string());
    doc.kv("failed", &combined.items.iter().filter(|i| !i.passed).count().to_string());
    Ok((doc, failed))
}
