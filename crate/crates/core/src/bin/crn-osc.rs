use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crn_osc::canon::{core_key, write_key_file, CanonicalKey};
use crn_osc::dynamics::{
    classify, hopf_screen, IntegratorConfig, OrbitConfig, OrbitRecord, TrajectoryClass,
};
use crn_osc::enumerate::{
    count_all_2species, count_crns, enumerate_crns, EnumSpec, DEFAULT_CEILING,
};
use crn_osc::inherit::{closure_step, motif_count_two_species, motif_frequency};
use crn_osc::kinetics::{rng_for, KineticsClass};
use crn_osc::model::{parse_many, Crn};
use crn_osc::workbench::{
    network_seed, search_sppo, sensitivity_corpus, sensitivity_experiment, simulate_draw, table1,
    verify_appendix_b, xiv_orbit, AppendixBConfig, RunRecord, ScreenConfig, Table1Config,
};

#[derive(Parser)]
#[command(
    name = "crn-osc",
    version,
    about = "Oscillation in small fully open reaction networks"
)]
struct Cli {
    /// Base seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the run record (JSON) here.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
enum Class {
    Ma,
    Pl,
}

impl From<Class> for KineticsClass {
    fn from(c: Class) -> Self {
        match c {
            Class::Ma => KineticsClass::MassAction,
            Class::Pl => KineticsClass::PhysicalPowerLaw,
        }
    }
}

#[derive(Args, Serialize)]
struct NetworkArg {
    /// Network file (text format) or key file (one hex key per line).
    #[arg(long)]
    network: PathBuf,
    /// Use the fully open extension of the network.
    #[arg(long)]
    open: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Count (and optionally list) nonisomorphic (k,l) networks.
    Enumerate {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        l: usize,
        /// Write the sorted core keys here.
        #[arg(long)]
        keys: Option<PathBuf>,
        /// Count every two-species network over all l instead.
        #[arg(long)]
        all_two_species: bool,
    },
    /// Inheritors at a (k,l) target from (k,l−1) and (k−1,l) seeds.
    InheritClosure {
        #[arg(long)]
        seeds: PathBuf,
        /// Target as K,L.
        #[arg(long, value_parser = parse_pair)]
        target: (usize, usize),
        #[arg(long)]
        keys: Option<PathBuf>,
    },
    /// Sample parameter sets and classify trajectories.
    Simulate {
        #[command(flatten)]
        net: NetworkArg,
        #[arg(long, value_enum, default_value = "ma")]
        class: Class,
        #[arg(long, default_value_t = 100)]
        samples: u64,
        #[arg(long)]
        rtol: Option<f64>,
        /// Write the trajectory of the first candidate (or of draw 0) as CSV.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Search for and certify a stable periodic orbit.
    Certify {
        #[command(flatten)]
        net: Option<NetworkArgOpt>,
        #[arg(long, value_enum, default_value = "ma")]
        class: Class,
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        /// Certify the explicit power-law set at this k instead of sampling.
        #[arg(long)]
        xiv_k: Option<f64>,
        #[arg(long)]
        rtol: Option<f64>,
    },
    /// Look for Jacobians with an eigenvalue pair near the imaginary axis.
    HopfScreen {
        #[command(flatten)]
        net: NetworkArg,
        #[arg(long, value_enum, default_value = "ma")]
        class: Class,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
    /// Fraction of a population containing a motif as an induced subnetwork.
    MotifFreq {
        /// Motif network(s); a network counts if it contains any of them.
        #[arg(long)]
        motif: PathBuf,
        /// Population file (keys or text); omit with --all-two-species.
        #[arg(long)]
        population: Option<PathBuf>,
        /// Use every two-species network as the population.
        #[arg(long)]
        all_two_species: bool,
    },
    /// Totals, simulation lower bounds and inheritance counts per (k,l).
    Table1 {
        #[arg(long, default_value_t = 3)]
        max_k: usize,
        #[arg(long, default_value_t = 3)]
        max_l: usize,
        /// Draws per network for the simulation search (0 skips it).
        #[arg(long, default_value_t = 0)]
        budget: u64,
        #[arg(long)]
        seed_with_simulation: bool,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// The (2,1) classification checks and the Hopf suite.
    VerifyAppendixB {
        #[arg(long, default_value_t = 100)]
        draws: u64,
    },
    /// Detection fraction against the number of draws per network.
    Sensitivity {
        #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
        ladder: Vec<u64>,
        /// Networks (keys or text); default is the built-in corpus.
        #[arg(long)]
        networks: Option<PathBuf>,
        /// Built-in corpus: atoms plus every STRIDE-th (3,3) inheritor.
        #[arg(long, default_value_t = 10)]
        stride: usize,
        #[arg(long, value_enum, default_value = "ma")]
        class: Class,
    },
}

#[derive(Args, Serialize)]
struct NetworkArgOpt {
    #[arg(long)]
    network: Option<PathBuf>,
    #[arg(long)]
    open: bool,
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected K,L")?;
    Ok((
        a.trim().parse().map_err(|e| format!("{e}"))?,
        b.trim().parse().map_err(|e| format!("{e}"))?,
    ))
}

/// Networks from a key file or a text file.
fn load_networks(path: &Path) -> anyhow::Result<Vec<Crn>> {
    let text = std::fs::read_to_string(path).with_context(|| path.display().to_string())?;
    let lines: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect();
    let is_keys = !lines.is_empty()
        && lines
            .iter()
            .all(|l| l.chars().all(|c| c.is_ascii_hexdigit()));
    if is_keys {
        Ok(lines
            .iter()
            .map(|l| CanonicalKey::from_hex(l)?.to_crn())
            .collect::<crn_osc::Result<_>>()?)
    } else {
        Ok(parse_many(&text)?)
    }
}

fn load_one(path: &Path, open: bool) -> anyhow::Result<Crn> {
    let mut all = load_networks(path)?;
    if all.len() != 1 {
        bail!(
            "{}: expected one network, found {}",
            path.display(),
            all.len()
        );
    }
    let crn = all.remove(0);
    Ok(if open {
        crn.fully_open_extension()
    } else {
        crn
    })
}

struct Outcome {
    passed: bool,
    config: serde_json::Value,
    inputs: Vec<String>,
    outputs: serde_json::Value,
}

fn outcome(
    passed: bool,
    config: impl Serialize,
    inputs: Vec<String>,
    outputs: impl Serialize,
) -> anyhow::Result<Outcome> {
    Ok(Outcome {
        passed,
        config: serde_json::to_value(config)?,
        inputs,
        outputs: serde_json::to_value(outputs)?,
    })
}

fn screen_config(rtol: Option<f64>) -> ScreenConfig {
    let mut cfg = ScreenConfig::default();
    if let Some(r) = rtol {
        cfg.integ = cfg.integ.with_tolerances(r, r * 1e-2);
    }
    cfg
}

fn print_record(rec: &OrbitRecord) {
    println!("verdict: {:?}", rec.verdict);
    if let Some(n) = &rec.note {
        println!("note: {n}");
    }
    if rec.period > 0.0 {
        println!("period: {:.10}", rec.period);
        println!("point: {:?}", rec.point);
        println!("reduced multipliers: {:?}", rec.reduced_multipliers);
        println!("residuals: {:?}", rec.residuals);
    }
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let seed = cli.seed;
    match &cli.cmd {
        Cmd::Enumerate {
            k,
            l,
            keys,
            all_two_species,
        } => {
            if *all_two_species {
                let total = count_all_2species()?;
                println!("two-species networks, l = 1..26: {total}");
                return outcome(true, "all-two-species", vec![], total);
            }
            let spec = EnumSpec::new(*k, *l)?;
            let n = count_crns(spec, DEFAULT_CEILING)?;
            println!("({k},{l}): {n}");
            if let Some(path) = keys {
                let keys: Vec<CanonicalKey> = enumerate_crns(spec, DEFAULT_CEILING)?
                    .into_iter()
                    .map(|(_, key)| key)
                    .collect();
                write_key_file(path, &keys)?;
            }
            outcome(true, (k, l), vec![], n)
        }
        Cmd::InheritClosure {
            seeds,
            target,
            keys,
        } => {
            let (k, l) = *target;
            let all = load_networks(seeds)?;
            let (mut add, mut insert) = (Vec::new(), Vec::new());
            for s in all {
                let core = s.core();
                match (core.n_species(), core.n_reactions()) {
                    (n, m) if n == k && m + 1 == l => add.push(core),
                    (n, m) if n + 1 == k && m == l => insert.push(core),
                    (n, m) => bail!("seed ({n},{m}) cannot reach ({k},{l}) in one step"),
                }
            }
            let report = closure_step(&add, &insert, (k, l))?;
            println!("({k},{l}) inheritors: {}", report.len());
            if let Some(path) = keys {
                let ks: Vec<CanonicalKey> = report
                    .inheritors
                    .iter()
                    .map(|h| CanonicalKey::from_hex(h))
                    .collect::<crn_osc::Result<_>>()?;
                write_key_file(path, &ks)?;
            }
            outcome(true, target, vec![seeds.display().to_string()], report)
        }
        Cmd::Simulate {
            net,
            class,
            samples,
            rtol,
            trajectory,
        } => {
            let crn = load_one(&net.network, net.open)?;
            let cfg = screen_config(*rtol);
            let mut counts = std::collections::BTreeMap::new();
            let mut saved = None;
            for d in 0..*samples {
                let (_, _, traj) = simulate_draw(&crn, (*class).into(), seed, d, &cfg)?;
                let c = classify(&traj, cfg.tail_window, cfg.conv_tol);
                *counts.entry(format!("{c:?}")).or_insert(0u64) += 1;
                if saved.is_none()
                    && (c == TrajectoryClass::OscillatoryCandidate || d + 1 == *samples)
                {
                    saved = Some((d, traj));
                }
            }
            for (c, n) in &counts {
                println!("{c}: {n}");
            }
            if let (Some(path), Some((d, _))) = (trajectory, &saved) {
                // Re-run the chosen draw recording the whole trajectory.
                let full = ScreenConfig {
                    integ: IntegratorConfig {
                        record_from: 0.0,
                        ..cfg.integ
                    },
                    ..cfg
                };
                let (_, _, traj) = simulate_draw(&crn, (*class).into(), seed, *d, &full)?;
                let mut w = csv::Writer::from_path(path)?;
                let mut header = vec!["t".to_string()];
                header.extend((1..=crn.n_species()).map(|i| format!("X{i}")));
                w.write_record(&header)?;
                for (t, x) in traj.times.iter().zip(&traj.states) {
                    let mut row = vec![t.to_string()];
                    row.extend(x.iter().map(f64::to_string));
                    w.write_record(&row)?;
                }
                w.flush()?;
                println!("trajectory of draw {d} written to {}", path.display());
            }
            outcome(
                true,
                (class, samples, cfg),
                vec![core_key(&crn).to_hex()],
                counts,
            )
        }
        Cmd::Certify {
            net,
            class,
            samples,
            xiv_k,
            rtol,
        } => {
            let mut ocfg = OrbitConfig::default();
            if let Some(r) = rtol {
                ocfg.integ = ocfg.integ.with_tolerances(*r, r * 1e-2);
            }
            if let Some(k) = xiv_k {
                let rec = xiv_orbit(*k, &ocfg)?;
                print_record(&rec);
                return outcome(
                    rec.is_certified(),
                    (k, ocfg),
                    vec![rec.network.clone()],
                    rec,
                );
            }
            let Some(NetworkArgOpt {
                network: Some(path),
                open,
            }) = net
            else {
                bail!("give --network or --xiv-k");
            };
            let crn = load_one(path, *open)?;
            let mut cfg = screen_config(None);
            cfg.orbit = ocfg;
            let out = search_sppo(&crn, (*class).into(), seed, *samples, &cfg)?;
            println!(
                "draws: {}, candidates: {}, first candidate: {:?}",
                out.draws, out.candidates, out.first_candidate
            );
            match &out.record {
                Some(rec) => print_record(rec),
                None => println!("verdict: no certified orbit"),
            }
            outcome(
                out.found(),
                (class, samples, cfg),
                vec![out.network.clone()],
                out,
            )
        }
        Cmd::HopfScreen {
            net,
            class,
            samples,
            tol,
        } => {
            let crn = load_one(&net.network, net.open)?;
            let ranges = ScreenConfig::default().ranges;
            let mut rng = rng_for(network_seed(seed, &crn), 0);
            let hit = hopf_screen(&crn, (*class).into(), *samples, &mut rng, &ranges, *tol)?;
            println!("{}", if hit { "positive" } else { "negative" });
            outcome(
                true,
                (class, samples, tol),
                vec![core_key(&crn).to_hex()],
                hit,
            )
        }
        Cmd::MotifFreq {
            motif,
            population,
            all_two_species,
        } => {
            let motifs: Vec<Crn> = load_networks(motif)?
                .into_iter()
                .map(|m| m.fully_open_extension())
                .collect();
            if *all_two_species {
                let (hits, total) = motif_count_two_species(&motifs)?;
                println!("{hits} / {total} = {:.5}", hits as f64 / total as f64);
                return outcome(true, "all-two-species", vec![], (hits, total));
            }
            let Some(pop) = population else {
                bail!("give --population or --all-two-species");
            };
            let nets: Vec<Crn> = load_networks(pop)?
                .into_iter()
                .map(|c| c.fully_open_extension())
                .collect();
            let f = motif_frequency(&motifs, &nets);
            println!("{:.5} of {} networks", f, nets.len());
            outcome(true, (), vec![pop.display().to_string()], f)
        }
        Cmd::Table1 {
            max_k,
            max_l,
            budget,
            seed_with_simulation,
            csv,
        } => {
            let cfg = Table1Config {
                max_k: *max_k,
                max_l: *max_l,
                budget: *budget,
                seed_with_simulation: *seed_with_simulation,
                seed,
                ..Table1Config::default()
            };
            let t = table1(&cfg)?;
            println!("k l total MA>= MA-inh PL>= PL-inh");
            for c in &t.cells {
                println!(
                    "{} {} {} {} {} {} {}{}",
                    c.k,
                    c.l,
                    c.total,
                    c.ma_sppo_lower,
                    c.ma_by_inheritance,
                    c.pl_sppo_lower,
                    c.pl_by_inheritance,
                    if c.partial { " (partial)" } else { "" }
                );
            }
            if let Some(path) = csv {
                t.write_csv(path)?;
            }
            let ok = t.cells.iter().all(|c| c.check().is_ok());
            outcome(ok, &cfg, vec![], &t)
        }
        Cmd::VerifyAppendixB { draws } => {
            let cfg = AppendixBConfig {
                draws: *draws,
                seed,
                ..AppendixBConfig::default()
            };
            let rep = verify_appendix_b(&cfg)?;
            for c in &rep.checks {
                println!(
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            outcome(rep.passed(), &cfg, vec![], &rep)
        }
        Cmd::Sensitivity {
            ladder,
            networks,
            stride,
            class,
        } => {
            let nets = match networks {
                Some(p) => load_networks(p)?
                    .into_iter()
                    .map(|c| c.fully_open_extension())
                    .collect(),
                None => sensitivity_corpus(*stride)?,
            };
            let cfg = ScreenConfig::default();
            let rep = sensitivity_experiment(&nets, (*class).into(), ladder, seed, &cfg)?;
            for r in &rep.rows {
                println!(
                    "{:>7} draws: {} / {} ({:.1}%)",
                    r.draws,
                    r.detected,
                    r.total,
                    100.0 * r.fraction
                );
            }
            println!("{}", rep.note);
            let monotone = rep.rows.windows(2).all(|w| w[0].detected <= w[1].detected);
            outcome(monotone, (class, &cfg), rep.networks.clone(), &rep)
        }
    }
}

fn command_name(cmd: &Cmd) -> &'static str {
    match cmd {
        Cmd::Enumerate { .. } => "enumerate",
        Cmd::InheritClosure { .. } => "inherit-closure",
        Cmd::Simulate { .. } => "simulate",
        Cmd::Certify { .. } => "certify",
        Cmd::HopfScreen { .. } => "hopf-screen",
        Cmd::MotifFreq { .. } => "motif-freq",
        Cmd::Table1 { .. } => "table1",
        Cmd::VerifyAppendixB { .. } => "verify-appendix-b",
        Cmd::Sensitivity { .. } => "sensitivity",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let start = Instant::now();
    let res = run(&cli).and_then(|o| {
        if let Some(path) = &cli.out {
            let mut config = o.config.clone();
            if let serde_json::Value::Object(m) = &mut config {
                m.insert("seed".into(), cli.seed.into());
            } else {
                config = serde_json::json!({ "seed": cli.seed, "args": config });
            }
            RunRecord::new(
                command_name(&cli.cmd),
                &config,
                o.inputs.clone(),
                &o.outputs,
                start.elapsed(),
            )?
            .write(path)?;
        }
        Ok(o.passed)
    });
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
