//! Subcommands. Every command writes its report to `out`, diagnostics to
//! `err`, and returns the exit code: 0 success, 1 a negative answer
//! (unbalanced, conversion failed, target not met), 2 invalid input.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use overhang_core::balance::{is_balanced, Mode, DEFAULT_TOL};
use overhang_core::model::{
    contacts, exact_overhang, make_diamond, make_harmonic, make_inverted_triangle, overhang,
};
use overhang_core::parabolic::{build_modified_parabolic, build_parabolic};
use overhang_core::search::{
    asymmetric_from_symmetric, exhaustive_d, local_search_brickwall, propagate_well_behaved,
    scaled_outline, search_unloaded, BrickWallProfile, LocalSearchOutcome, SearchOptions,
    UnloadedOptions,
};
use overhang_core::shield::{convert, report as shield_report, ConversionResult};
use overhang_core::spinal::{
    balance_displacements, optimize, optimize_fixed_k, realize, sqrt_construction, SpinalDesign,
    SpinalOptions,
};
use overhang_core::{Rational, Scalar, Stack};

use crate::document::{
    outline_csv, parse_decimal, parse_document, parse_profile, stack_document, write_document,
    write_profile, Document,
};
use crate::render::{render_svg, RenderSpec};
use crate::sig;

#[derive(Debug, Parser)]
#[command(name = "overhang", version, about = "Balance, build and search block stacks that reach out over a table edge")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Float,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Harmonic,
    Triangle,
    Diamond,
    Parabolic,
    Modified,
    SqrtSpinal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Construction {
    Optimal,
    Sqrt,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Balanced (exit 0), unbalanced (1) or invalid (2).
    Verify {
        /// Stack document, or - for stdin.
        file: String,
        #[arg(long, value_enum, default_value_t = ModeArg::Float)]
        mode: ModeArg,
        /// Residual tolerance in float mode.
        #[arg(long, env = "OVERHANG_TOL", default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// List every nonzero witness force.
        #[arg(long)]
        witness: bool,
    },
    /// Write a stack document for one of the standard families.
    Build {
        #[arg(value_enum)]
        family: Family,
        /// n, m, d or total weight, depending on the family.
        param: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Best spinal stack for a total weight.
    Spinal {
        #[arg(long)]
        weight: f64,
        /// Fix the number of spine blocks.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum, default_value_t = Construction::Optimal)]
        construction: Construction,
        /// No point weight on the topmost block.
        #[arg(long)]
        top_unloaded: bool,
        /// Write the loaded spine as a stack document.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Replace the point weights of a spinal stack by real blocks.
    Convert {
        /// Loaded spine document, or - for stdin.
        file: Option<String>,
        /// Convert the optimal spinal stack of this integral weight instead.
        #[arg(long, conflicts_with = "file")]
        weight: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Print every shield layer.
        #[arg(long)]
        report: bool,
    },
    Search {
        #[command(subcommand)]
        what: SearchCommand,
    },
    /// Draw a stack document as SVG.
    Render {
        file: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Pixels per block length.
        #[arg(long, default_value_t = 40.0)]
        scale: f64,
        #[arg(long)]
        forces: bool,
        #[arg(long)]
        no_weights: bool,
        #[arg(long)]
        no_shading: bool,
    },
    /// Write documents and drawings of the standard stacks into a directory.
    Figures {
        dir: PathBuf,
        /// Include the overhang-10 brick-wall searches (about a minute).
        #[arg(long)]
        slow: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum SearchCommand {
    /// Best stack of n blocks over every structure (n ≤ 7).
    Exhaustive {
        n: usize,
        #[arg(long, default_value_t = 20)]
        starts: usize,
        #[arg(long, default_value_t = SearchOptions::default().seed)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Local search over brick-wall profiles.
    Brickwall {
        /// Target overhang, a multiple of ½.
        #[arg(long)]
        overhang: String,
        #[arg(long, conflicts_with = "asymmetric")]
        symmetric: bool,
        #[arg(long)]
        asymmetric: bool,
        /// Bare stacks, no point weights: fewest blocks that balance.
        #[arg(long, conflicts_with = "asymmetric")]
        bare: bool,
        #[arg(long, default_value_t = 95)]
        max_blocks: usize,
        /// Start from this profile document.
        #[arg(long)]
        seed_profile: Option<PathBuf>,
        /// Stack document of the result (loaded at the minimum weight).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Profile document of the result.
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Scaled outline as CSV.
        #[arg(long)]
        outline: Option<PathBuf>,
    },
}

/// Failure that ends a command with exit code 2.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Document { path: String, message: String },
    #[error("{0}")]
    Core(#[from] overhang_core::Error),
    #[error("{0}")]
    Usage(String),
}

pub struct Streams<'a> {
    pub stdin: &'a mut dyn Read,
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

fn read_text(path: &str, io: &mut Streams) -> Result<String, CliError> {
    let mut s = String::new();
    let r = if path == "-" {
        io.stdin.read_to_string(&mut s).map(|_| ())
    } else {
        fs::read_to_string(path).map(|t| s = t)
    };
    r.map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })?;
    Ok(s)
}

fn load(path: &str, io: &mut Streams) -> Result<Document, CliError> {
    let text = read_text(path, io)?;
    parse_document(&text).map_err(|e| CliError::Document {
        path: path.into(),
        message: e.to_string(),
    })
}

fn save(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn w(out: &mut dyn Write, s: String) {
    let _ = out.write_all(s.as_bytes());
}

/// Runs one parsed command line.
pub fn run(cli: Cli, io: &mut Streams) -> i32 {
    let name = subcommand_name(&cli.command);
    let res = match cli.command {
        Command::Verify {
            file,
            mode,
            tol,
            witness,
        } => verify(&file, mode, tol, witness, io),
        Command::Build {
            family,
            param,
            output,
        } => build(family, param, output.as_deref(), io),
        Command::Spinal {
            weight,
            k,
            construction,
            top_unloaded,
            emit,
        } => spinal(weight, k, construction, top_unloaded, emit.as_deref(), io),
        Command::Convert {
            file,
            weight,
            output,
            report,
        } => convert_cmd(file.as_deref(), weight, output.as_deref(), report, io),
        Command::Search { what } => search(what, io),
        Command::Render {
            file,
            output,
            scale,
            forces,
            no_weights,
            no_shading,
        } => {
            let spec = RenderSpec {
                scale,
                show_forces: forces,
                show_point_weights: !no_weights,
                shading: !no_shading,
            };
            render(&file, output.as_deref(), &spec, io)
        }
        Command::Figures { dir, slow } => figures(&dir, slow, io),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            w(io.err, format!("error: {e}\n"));
            if let CliError::Usage(_) = e {
                let mut top = Cli::command();
                if let Some(sub) = top.find_subcommand_mut(name) {
                    w(io.err, format!("\n{}\n", sub.render_usage()));
                }
            }
            2
        }
    }
}

fn subcommand_name(c: &Command) -> &'static str {
    match c {
        Command::Verify { .. } => "verify",
        Command::Build { .. } => "build",
        Command::Spinal { .. } => "spinal",
        Command::Convert { .. } => "convert",
        Command::Search { .. } => "search",
        Command::Render { .. } => "render",
        Command::Figures { .. } => "figures",
    }
}

fn verify(file: &str, mode: ModeArg, tol: f64, list: bool, io: &mut Streams) -> Result<i32, CliError> {
    let doc = load(file, io)?;
    let stack = &doc.stack;
    let m = match mode {
        ModeArg::Float => Mode::Float { tol },
        ModeArg::Exact => Mode::Exact,
    };
    let r = is_balanced(stack, m)?;
    let cs = contacts(stack)?;
    let mode_text = match mode {
        ModeArg::Float => format!("float, tol {tol:e}"),
        ModeArg::Exact => "exact".to_string(),
    };
    let mut s = format!(
        "{}  ({mode_text})\nblocks {}, contacts {}, point weights {}\noverhang {}\n",
        if r.balanced { "balanced" } else { "unbalanced" },
        stack.len(),
        cs.len(),
        stack.weights.len(),
        sig(overhang(stack)?)
    );
    if r.balanced {
        let nonzero = r.witness.iter().filter(|f| f.magnitude > 1e-12).count();
        s += &format!(
            "witness: {} of {} endpoint forces nonzero, max residual {}\n",
            nonzero,
            r.witness.len(),
            sig(r.max_residual)
        );
        if list {
            for f in r.witness.iter().filter(|f| f.magnitude > 1e-12) {
                let (x, end) = match f.end {
                    overhang_core::balance::End::A => (f.contact.a, "a"),
                    overhang_core::balance::End::B => (f.contact.b, "b"),
                };
                let lower = match f.contact.lower {
                    overhang_core::Lower::Table => "table".to_string(),
                    overhang_core::Lower::Block(b) => b.to_string(),
                };
                s += &format!("  {} on {lower} at {end} = {}: {}\n", f.contact.upper, sig(x), sig(f.magnitude));
            }
        }
    } else if let Some(c) = &r.certificate {
        let support = c
            .force
            .iter()
            .zip(&c.moment)
            .filter(|(a, b)| **a != 0.0 || **b != 0.0)
            .count();
        s += &format!(
            "certificate: multipliers on {support} blocks, checked {}\n",
            if c.exact { "exactly" } else { "in floating point" }
        );
    }
    w(io.out, s);
    Ok(if r.balanced { 0 } else { 1 })
}

fn count_param(v: f64, what: &str) -> Result<usize, CliError> {
    if v >= 1.0 && v.fract() == 0.0 && v < 1e9 {
        Ok(v as usize)
    } else {
        Err(CliError::Usage(format!("{what} must be a positive integer")))
    }
}

fn emit_doc(doc: &Document, output: Option<&Path>, io: &mut Streams) -> Result<(), CliError> {
    let text = write_document(doc);
    match output {
        Some(p) => save(p, &text),
        None => {
            w(io.out, text);
            Ok(())
        }
    }
}

fn summary(stack: &Stack) -> Result<String, CliError> {
    let o = match exact_overhang(stack) {
        Ok(r) => format!("{} ({})", sig(r.to_float()), r),
        Err(_) => sig(overhang(stack)?),
    };
    Ok(format!("blocks {}\noverhang {o}\n", stack.len()))
}

fn build(family: Family, param: f64, output: Option<&Path>, io: &mut Streams) -> Result<i32, CliError> {
    let doc = match family {
        Family::Harmonic => stack_document(make_harmonic(count_param(param, "n")?)?.named("harmonic")),
        Family::Triangle => stack_document(make_inverted_triangle(count_param(param, "m")?)?.named("inverted triangle")),
        Family::Diamond => stack_document(make_diamond(count_param(param, "m")?)?.named("diamond")),
        Family::Parabolic => {
            let d = count_param(param, "d")? as u32;
            stack_document(build_parabolic(d)?.stack.named("parabolic"))
        }
        Family::Modified => {
            let d = count_param(param, "d")? as u32;
            let (stack, order) = build_modified_parabolic(d)?;
            Document {
                stack: stack.named("modified parabolic"),
                order: Some(order),
            }
        }
        Family::SqrtSpinal => stack_document(realize(&sqrt_construction(param)?).named("sqrt spinal")),
    };
    let text = summary(&doc.stack)?;
    emit_doc(&doc, output, io)?;
    if output.is_some() {
        w(io.out, text);
    } else {
        w(io.err, text);
    }
    Ok(0)
}

fn design_report(d: &SpinalDesign) -> String {
    let ws: Vec<String> = d.weights.iter().map(|v| sig(*v)).collect();
    let ds: Vec<String> = d.displacements.iter().map(|v| sig(*v)).collect();
    format!(
        "k {}\ntotal weight {}\nweights (top first) {}\ndisplacements {}\n",
        d.k,
        sig(d.total_weight),
        ws.join(" "),
        ds.join(" ")
    )
}

fn spinal(
    weight: f64,
    k: Option<usize>,
    construction: Construction,
    top_unloaded: bool,
    emit: Option<&Path>,
    io: &mut Streams,
) -> Result<i32, CliError> {
    let opts = SpinalOptions { top_unloaded };
    let (design, head) = match (construction, k) {
        (Construction::Sqrt, _) => {
            let d = sqrt_construction(weight)?;
            let h = format!("sqrt construction overhang {}\n", sig(d.overhang));
            (d, h)
        }
        (Construction::Optimal, Some(k)) => {
            let o = optimize_fixed_k(weight, k, opts)?;
            let h = format!("S*_{k}({weight}) = {}\nsplit {}\n", sig(o.value), o.split);
            (o.design, h)
        }
        (Construction::Optimal, None) => {
            let o = optimize(weight, opts)?;
            let h = format!("S*({weight}) = {}\nk* {}\nsplit {}\n", sig(o.value), o.k_star, o.split);
            (o.design, h)
        }
    };
    w(io.out, head + &design_report(&design));
    if let Some(p) = emit {
        save(p, &write_document(&stack_document(realize(&design).named("spinal"))))?;
    }
    Ok(0)
}

/// Spine weights read back from a loaded spine document: one block per
/// level, point weights only at left edges.
fn design_from_stack(stack: &Stack) -> Result<SpinalDesign, CliError> {
    let bad = |m: &str| CliError::Usage(format!("not a loaded spine: {m}"));
    let k = stack.len();
    let mut by_level: Vec<Option<usize>> = vec![None; k];
    for (i, b) in stack.blocks.iter().enumerate() {
        let l = b.level as usize;
        if l >= k || by_level[l].replace(i).is_some() {
            return Err(bad("levels must hold exactly one block each"));
        }
    }
    let order: Vec<usize> = by_level.into_iter().map(|b| b.unwrap()).collect();
    let mut weights = vec![0.0; k];
    for pw in &stack.weights {
        let b = &stack.blocks[pw.block];
        if (pw.position - b.x).abs() > 1e-12 {
            return Err(bad("point weights must sit at left edges"));
        }
        // spine index from the top
        weights[k - 1 - b.level as usize] += pw.magnitude;
    }
    let design = balance_displacements(&weights)?;
    let expected = realize(&design);
    for (level, &b) in order.iter().enumerate() {
        if (expected.blocks[level].x - stack.blocks[b].x).abs() > 1e-9 {
            return Err(bad("block positions do not match the balanced spine"));
        }
    }
    Ok(design)
}

fn conversion_text(c: &ConversionResult, full: bool) -> String {
    let mut s = format!(
        "{}\nblocks {}\nshields placed {}\ntowers {}\nrebuilt top piles {}\n",
        if c.success { "converted" } else { "conversion failed" },
        c.stack.len(),
        c.placed_shields,
        c.towers.len(),
        c.residual_top.len()
    );
    if !c.diagnostics.is_empty() {
        s += &format!("{}\n", c.diagnostics);
    }
    if full {
        s += &shield_report(c);
    }
    s
}

fn convert_cmd(
    file: Option<&str>,
    weight: Option<f64>,
    output: Option<&Path>,
    full: bool,
    io: &mut Streams,
) -> Result<i32, CliError> {
    let design = match (file, weight) {
        (_, Some(wt)) => optimize(wt, SpinalOptions::default())?.design,
        (Some(f), None) => design_from_stack(&load(f, io)?.stack)?,
        (None, None) => return Err(CliError::Usage("give a document or --weight".into())),
    };
    let c = convert(&design)?;
    w(io.out, conversion_text(&c, full));
    if c.success {
        if let Some(p) = output {
            save(p, &write_document(&stack_document(c.stack.clone().named("converted spinal"))))?;
        }
        w(io.out, format!("overhang {}\n", sig(overhang(&c.stack)?)));
        Ok(0)
    } else {
        Ok(1)
    }
}

fn parse_target(s: &str) -> Result<Rational, CliError> {
    parse_decimal(s.trim()).ok_or_else(|| CliError::Usage(format!("bad overhang {s}")))
}

fn profile_lines(p: &BrickWallProfile) -> String {
    let widths: Vec<String> = p.widths().iter().map(|v| v.to_string()).collect();
    format!(
        "levels {}\nblocks {}\nwidths {}\n",
        p.levels(),
        p.blocks(),
        widths.join(" ")
    )
}

fn write_search_outputs(
    p: &BrickWallProfile,
    stack: &Stack,
    output: Option<&Path>,
    profile: Option<&Path>,
    outline: Option<&Path>,
) -> Result<(), CliError> {
    if let Some(path) = output {
        save(path, &write_document(&stack_document(stack.clone())))?;
    }
    if let Some(path) = profile {
        save(path, &write_profile(p))?;
    }
    if let Some(path) = outline {
        save(path, &outline_csv(&scaled_outline(p)?))?;
    }
    Ok(())
}

fn loaded_stack_of(o: &LocalSearchOutcome) -> Result<Stack, CliError> {
    let a = propagate_well_behaved::<Rational>(&o.profile)?;
    let w = a
        .min_weight()
        .ok_or_else(|| CliError::Usage("profile cannot be balanced".into()))?;
    Ok(a.loaded_stack(&w).named("loaded brick wall"))
}

fn search(what: SearchCommand, io: &mut Streams) -> Result<i32, CliError> {
    match what {
        SearchCommand::Exhaustive {
            n,
            starts,
            seed,
            output,
        } => {
            let opts = SearchOptions {
                starts,
                seed,
                ..SearchOptions::default()
            };
            let (d, stack, s) = exhaustive_d(n, opts)?;
            let levels: Vec<String> = s.levels.iter().map(|v| v.to_string()).collect();
            w(
                io.out,
                format!("D({n}) = {}\nlevels {}\n", sig(d), levels.join(" ")),
            );
            if let Some(p) = output {
                save(&p, &write_document(&stack_document(stack.named(&format!("best {n}-block stack")))))?;
            }
            Ok(0)
        }
        SearchCommand::Brickwall {
            overhang: target,
            symmetric: _,
            asymmetric,
            bare,
            max_blocks,
            seed_profile,
            output,
            profile,
            outline,
        } => {
            let t = parse_target(&target)?;
            let seed = match &seed_profile {
                Some(p) => {
                    let text = fs::read_to_string(p).map_err(|source| CliError::Io {
                        path: p.display().to_string(),
                        source,
                    })?;
                    Some(parse_profile(&text).map_err(|e| CliError::Document {
                        path: p.display().to_string(),
                        message: e.to_string(),
                    })?)
                }
                None => None,
            };
            if bare {
                let o = search_unloaded(
                    &t,
                    UnloadedOptions {
                        max_blocks,
                        ..UnloadedOptions::default()
                    },
                )?;
                let stack = o.profile.stack().named("bare brick wall");
                w(
                    io.out,
                    format!(
                        "{}\n{}missing top weight {}\n",
                        if o.exact { "balanced (exact)" } else { "not balanced" },
                        profile_lines(&o.profile),
                        sig(o.missing)
                    ),
                );
                write_search_outputs(&o.profile, &stack, output.as_deref(), profile.as_deref(), outline.as_deref())?;
                return Ok(if o.exact { 0 } else { 1 });
            }
            let o = if asymmetric && seed.is_none() {
                let (sym, asym) = asymmetric_from_symmetric(&t)?;
                w(io.out, format!("symmetric weight {}\n", sig(sym.weight)));
                asym
            } else {
                local_search_brickwall(&t, !asymmetric, seed)?
            };
            let stack = loaded_stack_of(&o)?;
            w(
                io.out,
                format!(
                    "weight {}\n{}moves {}\n",
                    sig(o.weight),
                    profile_lines(&o.profile),
                    o.trace.len() - 1
                ),
            );
            write_search_outputs(&o.profile, &stack, output.as_deref(), profile.as_deref(), outline.as_deref())?;
            Ok(0)
        }
    }
}

fn render(file: &str, output: Option<&Path>, spec: &RenderSpec, io: &mut Streams) -> Result<i32, CliError> {
    let doc = load(file, io)?;
    let svg = render_svg(&doc.stack, spec)?;
    match output {
        Some(p) => save(p, &svg)?,
        None => w(io.out, svg),
    }
    Ok(0)
}

fn figures(dir: &Path, slow: bool, io: &mut Streams) -> Result<i32, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut items: Vec<(String, Document)> = vec![
        ("harmonic-10".into(), stack_document(make_harmonic(10)?.named("harmonic"))),
        ("triangle-2".into(), stack_document(make_inverted_triangle(2)?.named("inverted 2-triangle"))),
        ("triangle-3".into(), stack_document(make_inverted_triangle(3)?.named("inverted 3-triangle"))),
        ("diamond-4".into(), stack_document(make_diamond(4)?.named("4-diamond"))),
        ("diamond-5".into(), stack_document(make_diamond(5)?.named("5-diamond"))),
        ("parabolic-6".into(), stack_document(build_parabolic(6)?.stack.named("parabolic 6-stack"))),
    ];
    let (m, order) = build_modified_parabolic(4)?;
    items.push((
        "modified-4".into(),
        Document {
            stack: m.named("modified parabolic 4-stack"),
            order: Some(order),
        },
    ));
    let best = optimize(100.0, SpinalOptions::default())?;
    items.push(("spinal-100".into(), stack_document(realize(&best.design).named("loaded spinal, weight 100"))));
    let c = convert(&best.design)?;
    if c.success {
        items.push(("converted-100".into(), stack_document(c.stack.named("spinal stack of 100 blocks"))));
    }
    let bare = search_unloaded(&Rational::from_integer(4.into()), UnloadedOptions::default())?;
    if bare.exact {
        items.push((
            "brickwall-4".into(),
            stack_document(bare.profile.stack().named("bare brick wall, overhang 4")),
        ));
    }
    let loaded = local_search_brickwall(&Rational::from_integer(4.into()), true, None)?;
    items.push(("loaded-brickwall-4".into(), stack_document(loaded_stack_of(&loaded)?)));
    if slow {
        let ten = Rational::from_integer(10.into());
        let (sym, asym) = asymmetric_from_symmetric(&ten)?;
        items.push(("symmetric-10".into(), stack_document(loaded_stack_of(&sym)?)));
        items.push(("asymmetric-10".into(), stack_document(loaded_stack_of(&asym)?)));
        save(&dir.join("symmetric-10.csv"), &outline_csv(&scaled_outline(&sym.profile)?))?;
        save(&dir.join("asymmetric-10.csv"), &outline_csv(&scaled_outline(&asym.profile)?))?;
    }
    let spec = RenderSpec::default();
    for (name, doc) in &items {
        save(&dir.join(format!("{name}.json")), &write_document(doc))?;
        save(&dir.join(format!("{name}.svg")), &render_svg(&doc.stack, &spec)?)?;
        w(io.out, format!("{name}: {} blocks\n", doc.stack.len()));
    }
    Ok(0)
}
