//! Command-line frontend.
//!
//! Exit status: 0 = computation completed (the verdict is on stdout),
//! 2 = usage error, 3 = input format error, 4 = precondition violation.
//! Output is byte-identical across runs for fixed inputs and flags.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::Write;

use crate::amalgam::{
    check_ap, check_jep, check_sap, find_strong_amalgams, free_amalgam, injectivize, Amalgam,
    AmalgamationDiagram, PropertyCheck,
};
use crate::arrow::{
    check_arrow_with, search_witness, transfer_check, ArrowInstance, ArrowVerdict,
    CertificateMode,
};
use crate::classes::{parse_class_spec, ClassSpec};
use crate::embed::{enumerate_embeddings, Embedding};
use crate::error::Error;
use crate::formula::parse_formula;
use crate::product::{diagonal_check, full_product};
use crate::structure::Structure;
use crate::text::{parse_map, parse_structure, render_map, render_structure};

const USAGE: &str = "usage: ramseykit <command> [flags]

commands:
  arrow        --A FILE --B FILE --C FILE -r N [--canonical-certificate]
  witness      --class SPEC --A FILE --B FILE -r N --max-size K
  amalgam      --class SPEC --mode MODE [--max-size K]
               [--A FILE --B1 FILE --B2 FILE --e1 MAPFILE --e2 MAPFILE]
               (MODE: free | strong | check-ap | check-sap | check-jep)
  check-class  --class SPEC --in FILE
  enumerate    --class SPEC --size N
  product      --left FILE --right FILE
               | --left FILE --diagonal-check --sigma SYMS --tau SYMS
  injectivize  --class SPEC --F FILE --M FILE --hom MAPFILE
  transfer     --A FILE --B FILE --C FILE --phi FORMULA --name SYMBOL -r N
  embeddings   --A FILE --C FILE

global flags: --threads N (default 1), --format text|tsv
";

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure {
            code: if e.is_input_format() { 3 } else { 4 },
            message: e.to_string(),
        }
    }
}

fn fail_for(e: Error, context: &str) -> Failure {
    Failure {
        code: if e.is_input_format() { 3 } else { 4 },
        message: format!("{context}: {e}"),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum OutputFormat {
    Text,
    Tsv,
}

struct Parsed {
    command: String,
    values: BTreeMap<String, String>,
    switches: BTreeSet<String>,
}

const VALUE_FLAGS: &[&str] = &[
    "--A", "--B", "--C", "--B1", "--B2", "--e1", "--e2", "--F", "--M", "--hom", "--class",
    "--mode", "--max-size", "--size", "--left", "--right", "--sigma", "--tau", "--phi", "--name",
    "-r", "--threads", "--format", "--in",
];

const SWITCH_FLAGS: &[&str] = &["--canonical-certificate", "--diagonal-check"];

fn parse_args(args: &[String]) -> Result<Parsed, Failure> {
    let command = args
        .first()
        .ok_or_else(|| Failure::usage(USAGE))?
        .to_string();
    let mut values = BTreeMap::new();
    let mut switches = BTreeSet::new();
    let mut i = 1;
    while i < args.len() {
        let flag = &args[i];
        if SWITCH_FLAGS.contains(&flag.as_str()) {
            switches.insert(flag.clone());
            i += 1;
        } else if VALUE_FLAGS.contains(&flag.as_str()) {
            let value = args
                .get(i + 1)
                .ok_or_else(|| Failure::usage(format!("flag {flag} needs a value")))?;
            if values.insert(flag.clone(), value.clone()).is_some() {
                return Err(Failure::usage(format!("flag {flag} given twice")));
            }
            i += 2;
        } else {
            return Err(Failure::usage(format!("unknown flag {flag:?}")));
        }
    }
    Ok(Parsed {
        command,
        values,
        switches,
    })
}

impl Parsed {
    fn required(&self, flag: &str) -> Result<&str, Failure> {
        self.values
            .get(flag)
            .map(String::as_str)
            .ok_or_else(|| Failure::usage(format!("missing required flag {flag}")))
    }

    fn integer(&self, flag: &str) -> Result<usize, Failure> {
        let raw = self.required(flag)?;
        raw.parse()
            .map_err(|_| Failure::usage(format!("flag {flag}: invalid integer {raw:?}")))
    }

    fn structure(&self, flag: &str) -> Result<Structure, Failure> {
        let path = self.required(flag)?;
        let text = std::fs::read_to_string(path).map_err(|e| Failure {
            code: 3,
            message: format!("{flag} ({path}): {e}"),
        })?;
        parse_structure(&text).map_err(|e| fail_for(e, &format!("{flag} ({path})")))
    }

    fn map_file(&self, flag: &str, source_size: usize) -> Result<Vec<usize>, Failure> {
        let path = self.required(flag)?;
        let text = std::fs::read_to_string(path).map_err(|e| Failure {
            code: 3,
            message: format!("{flag} ({path}): {e}"),
        })?;
        parse_map(&text, source_size).map_err(|e| fail_for(e, &format!("{flag} ({path})")))
    }

    fn class(&self) -> Result<ClassSpec, Failure> {
        let raw = self.required("--class")?;
        parse_class_spec(raw).map_err(|e| fail_for(e, "--class"))
    }

    fn format(&self) -> Result<OutputFormat, Failure> {
        match self.values.get("--format").map(String::as_str) {
            None | Some("text") => Ok(OutputFormat::Text),
            Some("tsv") => Ok(OutputFormat::Tsv),
            Some(other) => Err(Failure::usage(format!(
                "--format must be 'text' or 'tsv', got {other:?}"
            ))),
        }
    }

    fn threads(&self) -> Result<usize, Failure> {
        match self.values.get("--threads") {
            None => Ok(1),
            Some(raw) => {
                let n: usize = raw
                    .parse()
                    .map_err(|_| Failure::usage(format!("--threads: invalid integer {raw:?}")))?;
                if n == 0 {
                    return Err(Failure::usage("--threads must be at least 1"));
                }
                Ok(n)
            }
        }
    }

    fn symbol_set(&self, flag: &str) -> Result<BTreeSet<String>, Failure> {
        let raw = self.required(flag)?;
        Ok(raw
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect())
    }
}

/// Runs one invocation; writes the report to `stdout`, errors to `stderr`,
/// and returns the exit status.
pub fn run(args: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match run_inner(args) {
        Ok(report) => {
            let _ = stdout.write_all(report.as_bytes());
            0
        }
        Err(failure) => {
            let _ = writeln!(stderr, "error: {}", failure.message.trim_end());
            failure.code
        }
    }
}

fn run_inner(args: &[String]) -> Result<String, Failure> {
    let parsed = parse_args(args)?;
    let format = parsed.format()?;
    let threads = parsed.threads()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure {
            code: 2,
            message: format!("--threads: {e}"),
        })?;
    pool.install(|| dispatch(&parsed, format))
}

fn dispatch(parsed: &Parsed, format: OutputFormat) -> Result<String, Failure> {
    match parsed.command.as_str() {
        "arrow" => cmd_arrow(parsed, format),
        "witness" => cmd_witness(parsed, format),
        "amalgam" => cmd_amalgam(parsed, format),
        "check-class" => cmd_check_class(parsed, format),
        "enumerate" => cmd_enumerate(parsed, format),
        "product" => cmd_product(parsed, format),
        "injectivize" => cmd_injectivize(parsed, format),
        "transfer" => cmd_transfer(parsed, format),
        "embeddings" => cmd_embeddings(parsed, format),
        "help" | "--help" | "-h" => Ok(USAGE.to_string()),
        other => Err(Failure::usage(format!(
            "unknown command {other:?}\n\n{USAGE}"
        ))),
    }
}

fn tsv(command: &str, verdict: &str, detail: &str) -> String {
    format!("command\tverdict\tdetail\n{command}\t{verdict}\t{detail}\n")
}

fn cmd_arrow(parsed: &Parsed, format: OutputFormat) -> Result<String, Failure> {
    let a = parsed.structure("--A")?;
    let b = parsed.structure("--B")?;
    let c = parsed.structure("--C")?;
    let colors = parsed.integer("-r")? as u32;
    let mode = if parsed.switches.contains("--canonical-certificate") {
        CertificateMode::Lexicographic
    } else {
        CertificateMode::FirstFound
    };
    let instance = ArrowInstance::new(a, b, c, colors)?;
    let certificate = check_arrow_with(&instance, mode)?;
    match certificate.verdict {
        ArrowVerdict::Holds { .. } => Ok(match format {
            OutputFormat::Text => "ARROW\n".to_string(),
            OutputFormat::Tsv => tsv("arrow", "ARROW", ""),
        }),
        ArrowVerdict::Fails { coloring } => Ok(match format {
            OutputFormat::Text => {
                let mut out = String::from("NOT-ARROW\n");
                for (i, color) in coloring.iter().enumerate() {
                    writeln!(out, "emb#{i} -> {color}").expect("string write");
                }
                out
            }
            OutputFormat::Tsv => {
                let csv: Vec<String> = coloring.iter().map(u32::to_string).collect();
                tsv("arrow", "NOT-ARROW", &csv.join(","))
            }
        }),
    }
}

fn cmd_witness(parsed: &Parsed, format: OutputFormat) -> Result<String, Failure> {
    let class = parsed.class()?;
    let a = parsed.structure("--A")?;
    let b = parsed.structure("--B")?;
    let colors = parsed.integer("-r")? as u32;
    let max_size = parsed.integer("--max-size")?;
    let witness = search_witness(&class, &a, &b, colors, max_size)?;
    Ok(match (witness, format) {
        (Some(w), OutputFormat::Text) => render_structure(&w),
        (Some(w), OutputFormat::Tsv) => tsv("witness", "found", &format!("size={}", w.size())),
        (None, OutputFormat::Text) => "none\n".to_string(),
        (None, OutputFormat::Tsv) => tsv("witness", "none", &format!("max-size={max_size}")),
    })
}

fn render_embedding_section(title: &str, map: &[usize]) -> String {
    let mut out = format!("# {title}\n");
    out.push_str(&render_map(map));
    out
}

fn render_amalgam(amalgam: &Amalgam) -> String {
    let mut out = String::new();
    out.push_str(&render_structure(amalgam.completed()));
    out.push('\n');
    out.push_str(&render_embedding_section("f1", amalgam.left_embedding().map()));
    out.push('\n');
    out.push_str(&render_embedding_section("f2", amalgam.right_embedding().map()));
    out
}

fn render_diagram(d: &AmalgamationDiagram) -> String {
    let mut out = String::new();
    out.push_str("# A\n");
    out.push_str(&render_structure(d.base()));
    out.push_str("\n# B1\n");
    out.push_str(&render_structure(d.left()));
    out.push_str("\n# B2\n");
    out.push_str(&render_structure(d.right()));
    out.push('\n');
    out.push_str(&render_embedding_section("e1", d.left_embedding().map()));
    out.push('\n');
    out.push_str(&render_embedding_section("e2", d.right_embedding().map()));
    out
}

fn read_diagram(parsed: &Parsed) -> Result<AmalgamationDiagram, Failure> {
    let base = parsed.structure("--A")?;
    let left = parsed.structure("--B1")?;
    let right = parsed.structure("--B2")?;
    let m1 = parsed.map_file("--e1", base.size())?;
    let m2 = parsed.map_file("--e2", base.size())?;
    let e1 = Embedding::new(&base, &left, m1).map_err(|e| fail_for(e, "--e1"))?;
    let e2 = Embedding::new(&base, &right, m2).map_err(|e| fail_for(e, "--e2"))?;
    Ok(AmalgamationDiagram::new(base, left, right, e1, e2)?)
}

fn cmd_amalgam(parsed: &Parsed, format: OutputFormat) -> Result<String, Failure> {
    let class = parsed.class()?;
    let mode = parsed.required("--mode")?;
    match mode {
        "free" => {
            let diagram = read_diagram(parsed)?;
            if *diagram.base().sig() != class.signature() {
                return Err(Failure::from(Error::SignatureMismatch {
                    context: "diagram signature differs from the class signature".to_string(),
                }));
            }
            let amalgam = free_amalgam(&diagram);
            Ok(match format {
                OutputFormat::Text => render_amalgam(&amalgam),
                OutputFormat::Tsv => tsv(
                    "free-amalgam",
                    "ok",
                    &format!("size={}", amalgam.completed().size()),
                ),
            })
        }
        "strong" => {
            let diagram = read_diagram(parsed)?;
            let amalgams = find_strong_amalgams(&diagram, &class)?;
            Ok(match format {
                OutputFormat::Text => {
                    let mut out = format!("count: {}\n", amalgams.len());
                    for (i, amalgam) in amalgams.iter().enumerate() {
                        writeln!(out, "\n# amalgam {i}").expect("string write");
                        out.push_str(&render_amalgam(amalgam));
                    }
                    out
                }
                OutputFormat::Tsv => tsv("strong-amalgams", &amalgams.len().to_string(), ""),
            })
        }
        "check-sap" | "check-ap" | "check-jep" => {
            let max_size = parsed.integer("--max-size")?;
            let (label, outcome) = match mode {
                "check-sap" => ("SAP", check_sap(&class, max_size)?),
                "check-ap" => ("AP", check_ap(&class, max_size)?),
                _ => ("JEP", check_jep(&class, max_size)?),
            };
            Ok(match (outcome, format) {
                (PropertyCheck::Ok, OutputFormat::Text) => {
                    format!("{label} verified up to size {max_size}\n")
                }
                (PropertyCheck::Ok, OutputFormat::Tsv) => tsv(
                    &format!("check-{}", label.to_lowercase()),
                    "ok",
                    &format!("max-size={max_size}"),
                ),
                (PropertyCheck::Counterexample(d), OutputFormat::Text) => {
                    let mut out =
                        format!("{label} counterexample (searched up to size {max_size}):\n");
                    out.push_str(&render_diagram(&d));
                    out
                }
                (PropertyCheck::Counterexample(_), OutputFormat::Tsv) => tsv(
                    &format!("check-{}", label.to_lowercase()),
                    "counterexample",
                    &format!("max-size={max_size}"),
                ),
            })
        }
        other => Err(Failure::usage(format!(
            "--mode must be free, strong, check-ap, check-sap or check-jep, got {other:?}"
        ))),
    }
}

fn cmd_check_class(parsed: &Parsed, format: OutputFormat) -> Result<String, Failure> {
    let class = parsed.class()?;
    let s = parsed.structure("--in")?;
    let member = class.membership(&s)?;
    Ok(match (member, format) {
        (true, OutputFormat::Text) => "MEMBER\n".to_string(),
        (false, OutputFormat::Text) => "NON-MEMBER\n".to_string(),
        (true, OutputFormat::Tsv) => tsv("check-class", "member", ""),
        (false, OutputFormat::Tsv) => tsv("check-class", "non-member", ""),
    })
}

fn cmd_enumerate(parsed: &Parsed, format: OutputFormat) -> Result<String, Failure> {
    let class = parsed.class()?;
    let size = parsed.integer("--size")?;
    let members = class.enumerate_members(size);
    Ok(match format {
        OutputFormat::Text => {
            let mut out = format!("count: {}\n", members.len());
            for (i, member) in members.iter().enumerate() {
                writeln!(out, "\n# member {i}").expect("string write");
                out.push_str(&render_structure(member));
            }
            out
        }
        OutputFormat::Tsv => tsv(
            "enumerate",
            &members.len().to_string(),
            &format!("size={size}"),
        ),
    })
}

fn cmd_product(parsed: &Parsed, format: OutputFormat) -> Result<String, Failure> {
    if parsed.switches.contains("--diagonal-check") {
        if parsed.values.contains_key("--right") {
            return Err(Failure::usage(
                "--diagonal-check splits --left by --sigma/--tau; --right must not be given",
            ));
        }
        let g = parsed.structure("--left")?;
        let sigma = parsed.symbol_set("--sigma")?;
        let tau = parsed.symbol_set("--tau")?;
        let verdict = diagonal_check(&g, &sigma, &tau)?;
        return Ok(match format {
            OutputFormat::Text => format!("diagonal-check: {verdict}\n"),
            OutputFormat::Tsv => tsv("diagonal-check", &verdict.to_string(), ""),
        });
    }
    let left = parsed.structure("--left")?;
    let right = parsed.structure("--right")?;
    let product = full_product(&left, &right)?;
    Ok(match format {
        OutputFormat::Text => {
            let mut out = render_structure(product.structure());
            out.push_str("# pairs\n");
            for index in 0..product.structure().size() {
                let (a, b) = product.pair_of_index(index);
                writeln!(out, "# {index} = ({a},{b})").expect("string write");
            }
            out
        }
        OutputFormat::Tsv => tsv(
            "product",
            "ok",
            &format!("size={}", product.structure().size()),
        ),
    })
}

fn cmd_injectivize(parsed: &Parsed, format: OutputFormat) -> Result<String, Failure> {
    let class = parsed.class()?;
    let small = parsed.structure("--F")?;
    let target = parsed.structure("--M")?;
    let hom = parsed.map_file("--hom", small.size())?;
    let (new_target, new_map) = injectivize(&hom, &small, &target, &class)?;
    Ok(match format {
        OutputFormat::Text => {
            let mut out = String::from("# M'\n");
            out.push_str(&render_structure(&new_target));
            out.push('\n');
            out.push_str(&render_embedding_section("h'", &new_map));
            out
        }
        OutputFormat::Tsv => tsv(
            "injectivize",
            "ok",
            &format!("target-size={}", new_target.size()),
        ),
    })
}

fn cmd_transfer(parsed: &Parsed, format: OutputFormat) -> Result<String, Failure> {
    let a = parsed.structure("--A")?;
    let b = parsed.structure("--B")?;
    let c = parsed.structure("--C")?;
    let colors = parsed.integer("-r")? as u32;
    let name = parsed.required("--name")?;
    let phi_text = parsed.required("--phi")?;
    let phi = parse_formula(phi_text, a.sig()).map_err(|e| fail_for(e, "--phi"))?;
    let report = transfer_check(&a, &b, &c, &phi, name, colors)?;
    let verdict = |cert: &crate::arrow::ArrowCertificate| {
        if cert.holds() {
            "ARROW"
        } else {
            "NOT-ARROW"
        }
    };
    Ok(match format {
        OutputFormat::Text => format!(
            "base: {}\nexpanded: {}\nverdicts-agree: {}\nemb-sets-equal: {}\n",
            verdict(&report.base),
            verdict(&report.expanded),
            report.verdicts_agree,
            report.embedding_sets_equal
        ),
        OutputFormat::Tsv => tsv(
            "transfer",
            if report.verdicts_agree { "agree" } else { "disagree" },
            &format!(
                "base={},expanded={},emb-sets-equal={}",
                verdict(&report.base),
                verdict(&report.expanded),
                report.embedding_sets_equal
            ),
        ),
    })
}

fn cmd_embeddings(parsed: &Parsed, format: OutputFormat) -> Result<String, Failure> {
    let a = parsed.structure("--A")?;
    let c = parsed.structure("--C")?;
    let embeddings = enumerate_embeddings(&a, &c)?;
    Ok(match format {
        OutputFormat::Text => {
            let mut out = format!("count: {}\n", embeddings.len());
            for (i, e) in embeddings.iter().enumerate() {
                let pairs: Vec<String> = e
                    .map()
                    .iter()
                    .enumerate()
                    .map(|(from, to)| format!("{from}->{to}"))
                    .collect();
                writeln!(out, "emb#{i}: {}", pairs.join(" ")).expect("string write");
            }
            out
        }
        OutputFormat::Tsv => tsv("embeddings", &embeddings.len().to_string(), ""),
    })
}
