use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use helmlab::boundary::{
    check_elastic_symbol_bound, circle_symbol_report, elastic_dtn0_matrix, hermitian2_eigenvalues,
    sphere_symbol_report, AbcFamily,
};
use helmlab::femcore::build_space;
use helmlab::filters::{compute_neumann_eigenpairs, filter_split, verify_norm_equivalence};
use helmlab::mesh::{export_mesh, generate_disk_mesh};
use helmlab::study::{
    self, asymptotic_rate, emit_csv, emit_svg, run_convergence, run_hp_study, run_pollution, write_elastic_csv,
    write_hp_csv, write_symbol_csv, ErrorKind, Example, StudyConfig,
};
use num_complex::Complex64;

#[derive(Parser)]
#[command(name = "helmlab", version, about = "High-order FEM laboratory for Helmholtz problems on the unit disk")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML study configuration
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding the config
    #[arg(long)]
    out: Option<PathBuf>,
    /// Wavenumbers, comma separated
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<f64>>,
    /// Polynomial degrees, comma separated
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<usize>>,
    /// Mesh levels, comma separated
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<usize>>,
    /// Filter threshold factor
    #[arg(long)]
    eta: Option<f64>,
    /// Second-order ABC family: feng, engquist_majda or bgt
    #[arg(long)]
    family: Option<String>,
    /// DtN truncation, or highest symbol mode for `symbols`
    #[arg(long)]
    cutoff: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// h-convergence study
    Converge(Common),
    /// Error growth with k at fixed points per wavelength
    Pollution(Common),
    /// Quasi-optimality under the hp resolution condition
    Hpstudy(Common),
    /// Boundary-operator symbol reports
    Symbols {
        kind: SymbolKind,
        #[command(flatten)]
        common: Common,
    },
    /// Neumann eigenpairs and filter checks
    Filters(Common),
    /// Mesh utilities
    Mesh {
        #[command(subcommand)]
        action: MeshAction,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SymbolKind {
    Helmholtz3d,
    Helmholtz2d,
    Elastic,
}

#[derive(Subcommand)]
enum MeshAction {
    /// Write the disk mesh in text form
    Export(Common),
}

type Res<T> = Result<T, Box<dyn std::error::Error>>;

impl Common {
    fn config(&self, default: Example) -> Res<StudyConfig> {
        let mut cfg = match &self.config {
            Some(path) => StudyConfig::load(path)?,
            None => StudyConfig::new(default, vec![1, 2, 3, 4], vec![1, 2, 3, 4], vec![4.0]),
        };
        if let Some(k) = &self.k {
            cfg.k = k.clone();
        }
        if let Some(p) = &self.p {
            cfg.p = p.clone();
        }
        if let Some(l) = &self.levels {
            cfg.levels = l.clone();
        }
        if let Some(e) = self.eta {
            cfg.eta = e;
        }
        if let Some(f) = &self.family {
            cfg.abc_family = f.parse::<AbcFamily>()?;
        }
        if let Some(c) = self.cutoff {
            cfg.dtn_cutoff = Some(c);
        }
        if let Some(o) = &self.out {
            cfg.output.dir = o.clone();
        }
        cfg.validate()?;
        fs::create_dir_all(&cfg.output.dir)?;
        Ok(cfg)
    }
}

fn out_file(cfg: &StudyConfig, name: &str) -> PathBuf {
    cfg.output.dir.join(name)
}

fn converge(c: &Common) -> Res<()> {
    let cfg = c.config(Example::DiskRobin)?;
    let recs = run_convergence(&cfg)?;
    let csv = out_file(&cfg, &cfg.output.csv);
    emit_csv(&recs, &csv)?;
    let p_max = *cfg.p.iter().max().expect("validated nonempty") as f64;
    let svg = out_file(&cfg, &cfg.output.svg);
    emit_svg(&recs, &svg, ErrorKind::L2, -(p_max + 1.0))?;
    emit_svg(&recs, &svg.with_extension("energy.svg"), ErrorKind::Energy, -p_max)?;
    for r in recs.iter().filter(|r| r.error.is_some()) {
        eprintln!("p={} level={} k={}: {}", r.p, r.level, r.k, r.error.as_deref().unwrap_or(""));
    }
    for &p in &cfg.p {
        for &k in &cfg.k {
            let series: Vec<_> = recs.iter().filter(|r| r.p == p && r.k == k).cloned().collect();
            let l2 = asymptotic_rate(&series, ErrorKind::L2, p as f64 + 1.0);
            let en = asymptotic_rate(&series, ErrorKind::Energy, p as f64);
            match (l2, en) {
                (Ok(a), Ok(b)) => println!("p={p} k={k}: L2 rate {a:.3}, energy rate {b:.3}"),
                (a, b) => println!("p={p} k={k}: rates unavailable ({:?}, {:?})", a.err(), b.err()),
            }
        }
    }
    println!("wrote {}", csv.display());
    Ok(())
}

fn pollution(c: &Common) -> Res<()> {
    let mut cfg = c.config(Example::DiskRobin)?;
    if c.config.is_none() && c.k.is_none() {
        cfg.k = vec![4.0, 8.0, 16.0];
    }
    let rep = run_pollution(&cfg)?;
    let csv = out_file(&cfg, "pollution.csv");
    emit_csv(&rep.records, &csv)?;
    for (p, g) in &rep.growth {
        println!("p={p}: energy-error growth {g:.4}");
    }
    println!("wrote {}", csv.display());
    Ok(())
}

fn hpstudy(c: &Common) -> Res<()> {
    let mut cfg = c.config(Example::DiskAbc2)?;
    if c.config.is_none() && c.k.is_none() {
        cfg.k = vec![4.0, 8.0, 16.0, 32.0];
    }
    let st = run_hp_study(&cfg)?;
    let path = out_file(&cfg, "hpstudy.csv");
    write_hp_csv(&st.records, BufWriter::new(File::create(&path)?))?;
    println!(
        "max ratio vs interpolant {:.4}, vs projection {:.4} (bound {})",
        st.max_ratio_interp,
        st.max_ratio_proj,
        study::QUASI_OPTIMALITY_BOUND
    );
    println!("wrote {}", path.display());
    Ok(())
}

fn symbols(kind: SymbolKind, c: &Common) -> Res<()> {
    let cfg = c.config(Example::DiskRobin)?;
    let ks = match &c.k {
        Some(k) => k.clone(),
        None => vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0],
    };
    let modes = c.cutoff.unwrap_or(200) as u32;
    match kind {
        SymbolKind::Helmholtz3d | SymbolKind::Helmholtz2d => {
            let (rows, name) = match kind {
                SymbolKind::Helmholtz3d => (sphere_symbol_report(modes, &ks)?, "symbols_helmholtz3d.csv"),
                _ => (circle_symbol_report(modes, &ks)?, "symbols_helmholtz2d.csv"),
            };
            let worst = rows
                .iter()
                .map(|r| r.slack_re.min(r.slack_im).min(r.slack_2k))
                .fold(f64::INFINITY, f64::min);
            let path = out_file(&cfg, name);
            write_symbol_csv(&rows, BufWriter::new(File::create(&path)?))?;
            println!("{} rows, smallest slack {worst:e}", rows.len());
            println!("wrote {}", path.display());
        }
        SymbolKind::Elastic => {
            let mut reports = Vec::new();
            for &k in &ks {
                let lo = (2.0 * k).ceil() as i64;
                let hi = ((10.0 * k).floor() as i64).min(modes as i64 - 1);
                if lo > hi {
                    continue;
                }
                for (lambda, mu) in [(0.0, 1.0), (1.0, 1.0), (10.0, 1.0), (0.0, 3.0), (1.0, 3.0), (10.0, 3.0)] {
                    reports.push(check_elastic_symbol_bound(k, lambda, mu, lo..=hi)?);
                }
            }
            let mut min_eig = f64::INFINITY;
            for n in -200..=200 {
                for (lambda, mu) in [(0.0, 1.0), (1.0, 1.0), (10.0, 1.0), (0.0, 3.0), (1.0, 3.0), (10.0, 3.0)] {
                    let e = hermitian2_eigenvalues(&elastic_dtn0_matrix(n, lambda, mu)?);
                    min_eig = min_eig.min(e[0] / mu);
                }
            }
            let max_ratio = reports.iter().map(|r| r.max_ratio).fold(0.0, f64::max);
            let path = out_file(&cfg, "symbols_elastic.csv");
            write_elastic_csv(&reports, BufWriter::new(File::create(&path)?))?;
            println!("max high-mode ratio {max_ratio:.4}, smallest M_n eigenvalue / mu {min_eig:e}");
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn filters(c: &Common) -> Res<()> {
    let cfg = c.config(Example::DiskRobin)?;
    let p = c.p.as_ref().and_then(|v| v.first().copied()).unwrap_or(3);
    let level = c.levels.as_ref().and_then(|v| v.first().copied()).unwrap_or(2);
    let k = cfg.k[0];
    let space = build_space(Arc::new(generate_disk_mesh(level, p.min(4))?), p)?;
    let n = space.n_dof();
    let (n1, n2) = (1.0, 2.0);
    let dec = compute_neumann_eigenpairs(&space, n1, n2, n)?;
    let path = out_file(&cfg, "spectrum.csv");
    dec.write_spectrum_csv(BufWriter::new(File::create(&path)?))?;
    let f: Vec<Complex64> = space.dof_points().iter().map(|x| Complex64::new((k * x[0]).cos(), x[1])).collect();
    let (lo, hi) = filter_split(&dec, &f, cfg.eta, k)?;
    let split: f64 = lo.iter().zip(&hi).zip(&f).map(|((a, b), c)| (a + b - c).norm()).fold(0.0, f64::max);
    let rep = verify_norm_equivalence(&dec, &space, n1, n2, 20, 1)?;
    println!("{n} dofs, {} modes below eta k = {}", dec.count_below(cfg.eta * k), cfg.eta * k);
    println!("split defect {split:e}, norm equivalence {}", if rep.pass { "PASS" } else { "FAIL" });
    println!("wrote {}", path.display());
    Ok(())
}

fn mesh_export(c: &Common) -> Res<()> {
    let level = c.levels.as_ref().and_then(|v| v.first().copied()).unwrap_or(2);
    let q = c.p.as_ref().and_then(|v| v.first().copied()).unwrap_or(2);
    let dir = c.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir)?;
    let mesh = generate_disk_mesh(level, q)?;
    let path = dir.join(format!("disk_level{level}.mesh"));
    export_mesh(&mesh, Path::new(&path))?;
    let s = mesh.stats();
    println!("{} triangles, {} vertices, h_max {:.4}", s.n_tri, s.n_vert, s.h_max);
    println!("wrote {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Converge(c) => converge(c),
        Command::Pollution(c) => pollution(c),
        Command::Hpstudy(c) => hpstudy(c),
        Command::Symbols { kind, common } => symbols(*kind, common),
        Command::Filters(c) => filters(c),
        Command::Mesh { action: MeshAction::Export(c) } => mesh_export(c),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
