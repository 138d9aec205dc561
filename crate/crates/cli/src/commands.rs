use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use log::info;
use maxent_core::corpus::OSCILLATORY_RULE_SIZE;
use maxent_core::io::{
    diagnostics_entries, format_float, read_histogram, read_moments, read_reconstruction,
    sweep_csv, write_atomic, write_histogram, write_moments, write_reconstruction, write_report,
    SweepRow,
};
use maxent_core::{
    build_basis_matrix, build_gauss_legendre, diagnose, estimate_gap, generate_histogram,
    generate_map_moments, solve, BasisKind, HistogramDensity, LogisticConfig, MomentVector,
    QuadratureRule, Reconstruction, SolverConfig, TestFunction,
};
use rayon::prelude::*;

use crate::args::{DiagnoseArgs, LogisticGenArgs, MomentsArgs, ReconstructArgs, Source, SweepArgs};

/// What a command reports back to `main`.
pub enum Status {
    Done,
    NotConverged,
}

fn prepare_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let meta = fs::metadata(dir)
        .with_context(|| format!("cannot access output directory {}", dir.display()))?;
    if meta.permissions().readonly() {
        bail!("output directory {} is not writable", dir.display());
    }
    Ok(())
}

fn output(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn write_context(path: &Path) -> String {
    format!("cannot write {}", path.display())
}

/// Moments of a corpus function: closed form unless `numeric` is set or the
/// function has none; quadrature on `nodes` points (2048 for oscillatory).
fn function_moments(
    f: TestFunction,
    kind: BasisKind,
    order: usize,
    nodes: usize,
    numeric: bool,
) -> Result<MomentVector> {
    if f.has_closed_form_moments() && !numeric {
        return Ok(f.analytic_moments_in(kind, order)?);
    }
    let size = if f == TestFunction::Oscillatory {
        OSCILLATORY_RULE_SIZE
    } else {
        nodes
    };
    let rule = build_gauss_legendre(size)?;
    Ok(f.numeric_moments_in(kind, order, &rule)?)
}

fn logistic_moments(cfg: &LogisticConfig, kind: BasisKind, order: usize) -> Result<MomentVector> {
    if kind != BasisKind::ShiftedChebyshev {
        bail!("logistic-map moments are generated in the chebyshev basis only");
    }
    info!(
        "iterating the logistic map (gamma {}, {} x {} samples)",
        cfg.gamma, cfg.ensemble_size, cfg.sample_steps
    );
    Ok(generate_map_moments(cfg, order)?)
}

fn load_moments(path: &Path, kind: BasisKind, order: Option<usize>) -> Result<MomentVector> {
    let mu = read_moments(path, kind)
        .with_context(|| format!("cannot read moments file {}", path.display()))?;
    match order {
        Some(m) if m > mu.order() => bail!(
            "--moments {m} exceeds the {} moments in {}",
            mu.order(),
            path.display()
        ),
        Some(m) => Ok(mu.truncated(m)?),
        None => Ok(mu),
    }
}

fn solver_report(
    recon: &Reconstruction,
    order: usize,
    nodes: usize,
    kind: BasisKind,
) -> Vec<(String, String)> {
    vec![
        ("iterations".into(), recon.iterations_used.to_string()),
        ("delta1".into(), format_float(recon.delta1_achieved)),
        ("mu0_residual".into(), format_float(recon.mu0_residual)),
        ("objective".into(), format_float(recon.objective)),
        (
            "partition_value".into(),
            format_float(recon.partition_value),
        ),
        ("converged".into(), recon.converged.to_string()),
        ("M".into(), order.to_string()),
        ("n_g".into(), nodes.to_string()),
        ("basis".into(), kind.to_string()),
    ]
}

fn status_of(converged: bool) -> Status {
    if converged {
        Status::Done
    } else {
        Status::NotConverged
    }
}

fn solve_on(
    mu: &MomentVector,
    nodes: usize,
    cfg: &SolverConfig,
) -> Result<(QuadratureRule, Reconstruction)> {
    let rule = build_gauss_legendre(nodes)?;
    let matrix = build_basis_matrix(mu.kind(), mu.order(), &rule)?;
    let recon = solve(mu, &matrix, &rule, cfg)?;
    Ok((rule, recon))
}

pub fn reconstruct(args: &ReconstructArgs) -> Result<Status> {
    prepare_out_dir(&args.out_dir)?;
    let cfg = args.solver.config();
    cfg.validate()?;
    let (mu, function) = match args.function {
        Source::File => {
            let path = args
                .moments_path
                .as_ref()
                .ok_or_else(|| anyhow!("--function file requires --moments-path"))?;
            (load_moments(path, args.basis, args.moments)?, None)
        }
        Source::Logistic => {
            let order = args.moments.unwrap_or(80);
            (
                logistic_moments(&args.logistic.config(), args.basis, order)?,
                None,
            )
        }
        Source::Function(f) => {
            let order = args
                .moments
                .ok_or_else(|| anyhow!("--moments is required for --function {f}"))?;
            (
                function_moments(f, args.basis, order, args.nodes, false)?,
                Some(f),
            )
        }
    };

    let (rule, recon) = solve_on(&mu, args.nodes, &cfg)?;
    let exact = function.map(|f| f.sample(&rule)).transpose()?;

    let recon_path = output(&args.out_dir, "recon.csv");
    write_reconstruction(&recon_path, rule.nodes(), exact.as_deref(), &recon.rho)
        .with_context(|| write_context(&recon_path))?;
    let mut report = solver_report(&recon, mu.order(), args.nodes, mu.kind());
    if let Some(eps) = args.epsilon {
        let gap = estimate_gap(&recon.rho, &rule, eps)?;
        report.extend([
            ("gap_left".into(), format_float(gap.left_edge)),
            ("gap_right".into(), format_float(gap.right_edge)),
            ("gap_width".into(), format_float(gap.width)),
        ]);
    }
    let report_path = output(&args.out_dir, "report.txt");
    write_report(&report_path, &report).with_context(|| write_context(&report_path))?;
    println!(
        "M={} n_g={} iterations={} delta1={:.3e} converged={}",
        mu.order(),
        args.nodes,
        recon.iterations_used,
        recon.delta1_achieved,
        recon.converged
    );
    Ok(status_of(recon.converged))
}

pub fn moments(args: &MomentsArgs) -> Result<Status> {
    prepare_out_dir(&args.out_dir)?;
    let mu = match args.function {
        Source::Function(f) => {
            function_moments(f, args.basis, args.moments, args.nodes, args.numeric)?
        }
        Source::Logistic => logistic_moments(&args.logistic.config(), args.basis, args.moments)?,
        Source::File => bail!("`moments` needs a corpus function or logistic, not file"),
    };
    let path = output(&args.out_dir, "moments.csv");
    write_moments(&path, &mu).with_context(|| write_context(&path))?;
    println!("wrote {} moments to {}", mu.order() + 1, path.display());
    Ok(Status::Done)
}

/// Nodal comparison values for a sweep: exact for corpus functions, the
/// histogram interpolated to the nodes for the logistic map.
enum Oracle {
    Function(TestFunction),
    Histogram(HistogramDensity),
}

impl Oracle {
    fn values(&self, rule: &QuadratureRule) -> Result<Vec<f64>> {
        match self {
            Oracle::Function(f) => Ok(f.sample(rule)?),
            Oracle::Histogram(h) => Ok(rule.nodes().iter().map(|&x| h.interpolate(x)).collect()),
        }
    }
}

fn sweep_threads() -> Result<Option<usize>> {
    match std::env::var("MAXENT_THREADS") {
        Ok(v) => {
            let n: usize = v
                .parse()
                .map_err(|_| anyhow!("MAXENT_THREADS must be a positive integer, got '{v}'"))?;
            if n == 0 {
                bail!("MAXENT_THREADS must be a positive integer, got 0");
            }
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}

pub fn sweep(args: &SweepArgs) -> Result<Status> {
    prepare_out_dir(&args.out_dir)?;
    let cfg = args.solver.config();
    cfg.validate()?;
    let top = *args
        .m_list
        .iter()
        .max()
        .expect("clap requires a non-empty list");
    let (label, oracle, full) = match args.function {
        Source::Function(f) => {
            let largest = *args.nodes.iter().max().expect("non-empty by default");
            let mu = function_moments(f, args.basis, top, largest, false)?;
            (f.to_string(), Oracle::Function(f), mu)
        }
        Source::Logistic => {
            let lcfg = args.logistic.config();
            let mu = logistic_moments(&lcfg, args.basis, top)?;
            let hist = generate_histogram(&lcfg)?;
            let path = output(&args.out_dir, "histogram.csv");
            write_histogram(&path, &hist).with_context(|| write_context(&path))?;
            ("logistic".to_owned(), Oracle::Histogram(hist), mu)
        }
        Source::File => bail!("`sweep` needs a corpus function or logistic, not file"),
    };

    let points: Vec<(usize, usize)> = args
        .nodes
        .iter()
        .flat_map(|&n| args.m_list.iter().map(move |&m| (m, n)))
        .collect();
    let run_point = |&(m, n): &(usize, usize)| -> Result<(SweepRow, bool)> {
        let mu = full.truncated(m)?;
        let (rule, recon) = solve_on(&mu, n, &cfg)?;
        let matrix = build_basis_matrix(mu.kind(), m, &rule)?;
        let exact = oracle.values(&rule)?;
        let report = diagnose(&mu, &exact, &recon.rho, &matrix, &rule, Some(args.epsilon))?;
        let path = output(&args.out_dir, &format!("recon_M{m}_n{n}.csv"));
        write_reconstruction(&path, rule.nodes(), Some(&exact), &recon.rho)
            .with_context(|| write_context(&path))?;
        info!("M={m} n_g={n}: delta1 {:.3e}", recon.delta1_achieved);
        Ok((
            SweepRow {
                function: label.clone(),
                order: m,
                nodes: n,
                report,
            },
            recon.converged,
        ))
    };

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = sweep_threads()? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .context("cannot start the sweep thread pool")?;
    let results: Vec<(SweepRow, bool)> =
        pool.install(|| points.par_iter().map(run_point).collect::<Result<Vec<_>>>())?;

    let all_converged = results.iter().all(|(_, c)| *c);
    let rows: Vec<SweepRow> = results.into_iter().map(|(r, _)| r).collect();
    let path = output(&args.out_dir, "sweep.csv");
    write_atomic(&path, &sweep_csv(&rows)?).with_context(|| write_context(&path))?;
    for r in &rows {
        println!(
            "{} M={} n_g={}: delta1={:.3e} delta2={:.3e} d_kl={:.3e}",
            r.function, r.order, r.nodes, r.report.delta1, r.report.delta2, r.report.d_kl
        );
    }
    Ok(status_of(all_converged))
}

pub fn logistic_gen(args: &LogisticGenArgs) -> Result<Status> {
    prepare_out_dir(&args.out_dir)?;
    let cfg = args.logistic.config();
    let mu = logistic_moments(&cfg, BasisKind::ShiftedChebyshev, args.moments)?;
    let hist = generate_histogram(&cfg)?;
    let moments_path = output(&args.out_dir, "moments.csv");
    write_moments(&moments_path, &mu).with_context(|| write_context(&moments_path))?;
    let hist_path = output(&args.out_dir, "histogram.csv");
    write_histogram(&hist_path, &hist).with_context(|| write_context(&hist_path))?;
    println!(
        "wrote {} and {}",
        moments_path.display(),
        hist_path.display()
    );
    Ok(Status::Done)
}

pub fn diagnose_saved(args: &DiagnoseArgs) -> Result<Status> {
    prepare_out_dir(&args.out_dir)?;
    let table = read_reconstruction(&args.recon_path)
        .with_context(|| format!("cannot read reconstruction {}", args.recon_path.display()))?;
    let rule = build_gauss_legendre(table.x.len())?;
    if let Some(j) = (0..table.x.len()).find(|&j| (table.x[j] - rule.nodes()[j]).abs() > 1e-15) {
        bail!(
            "{} is not on a {}-point Gauss-Legendre grid (row {})",
            args.recon_path.display(),
            table.x.len(),
            j + 1
        );
    }

    let mu = match (&args.moments_path, args.function) {
        (Some(path), _) => load_moments(path, args.basis, args.moments)?,
        (None, Source::Function(f)) => {
            let order = args
                .moments
                .ok_or_else(|| anyhow!("--moments or --moments-path is required"))?;
            function_moments(f, args.basis, order, rule.size(), false)?
        }
        (None, _) => bail!(
            "--moments-path is required for --function {}",
            args.function
        ),
    };
    let exact = match (&table.f_exact, args.function) {
        (Some(f), _) => f.clone(),
        (None, Source::Function(f)) => f.sample(&rule)?,
        (None, Source::Logistic) => {
            let path = args
                .histogram_path
                .as_ref()
                .ok_or_else(|| anyhow!("--function logistic requires --histogram-path"))?;
            let hist = read_histogram(path)
                .with_context(|| format!("cannot read histogram {}", path.display()))?;
            rule.nodes().iter().map(|&x| hist.interpolate(x)).collect()
        }
        (None, Source::File) => {
            bail!("no exact values: recon.csv lacks f_exact and --function is file")
        }
    };
    let matrix = build_basis_matrix(mu.kind(), mu.order(), &rule)?;
    let report = diagnose(&mu, &exact, &table.rho, &matrix, &rule, args.epsilon)?;
    let entries = diagnostics_entries(&report);
    let path = output(&args.out_dir, "diagnostics.txt");
    write_report(&path, &entries).with_context(|| write_context(&path))?;
    for (k, v) in &entries {
        println!("{k}={v}");
    }
    Ok(Status::Done)
}
