//! Batch front end: JSON job configs in, CSV or NDJSON out.

mod config;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;

use config::*;
use output::{Table, Value};

use thetakit::builders::{baker_akhiezer, second_kind, third_kind, BAData};
use thetakit::elliptic::{
    elliptic_from_divisor, elliptic_from_poles, weierstrass_p, weierstrass_p_prime,
    wp_invariants, EllipticModulus, Lattice,
};
use thetakit::finite_gap::{fit_wave_vectors, landau_lifshitz_eval, sine_gordon_eval_grid};
use thetakit::hyperelliptic::{
    abel_map, build_curve, jacobi_inversion, period_matrix, riemann_constants, CurvePoint, Divisor,
    Sheet,
};
use thetakit::kirchhoff::{clebsch_spectrum, integrate, s_flow};
use thetakit::selftest::{run_all, SelftestConfig};
use thetakit::theta::{
    enumerate_half_periods, theta_char, theta_derivative, Characteristic, Parity, Tolerance,
};

#[derive(Parser)]
#[command(name = "thetakit", version, about = "Riemann theta functions and their applications")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct IoArgs {
    /// Path to the JSON job configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit NDJSON instead of CSV.
    #[arg(long)]
    json: bool,
    /// Target relative accuracy of theta evaluations.
    #[arg(long, default_value_t = 1e-10)]
    eps: f64,
    /// Seed for randomized suites.
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Theta function evaluation.
    Theta {
        #[command(subcommand)]
        sub: ThetaCommand,
    },
    /// Genus-1 elliptic machinery.
    Elliptic {
        #[command(subcommand)]
        sub: EllipticCommand,
    },
    /// Hyperelliptic curves, periods, Abel maps and inversion.
    Curve {
        #[command(subcommand)]
        sub: CurveCommand,
    },
    /// Meromorphic and Baker-Akhiezer function builders.
    Builders {
        #[command(subcommand)]
        sub: BuildersCommand,
    },
    /// Finite-gap PDE solution evaluators.
    Pde {
        #[command(subcommand)]
        sub: PdeCommand,
    },
    /// Kirchhoff rigid-body integrable systems.
    Kirchhoff {
        #[command(subcommand)]
        sub: KirchhoffCommand,
    },
    /// Run the full invariant suite (criteria 1-16).
    Selftest {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ThetaCommand {
    /// Evaluate theta (optionally with characteristic and derivative).
    Eval {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Evaluate theta along a line of arguments, rows in parallel.
    Grid {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Enumerate the 4^g half-periods with parities.
    Halfperiods {
        #[arg(long)]
        genus: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum EllipticCommand {
    /// Weierstrass p and p' on a list of points.
    Wp {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Invariants g2, g3 of a lattice.
    Invariants {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Build an elliptic function from zeros/poles or pole residues.
    Build {
        #[command(flatten)]
        io: IoArgs,
    },
}

#[derive(Subcommand)]
enum CurveCommand {
    /// Period matrices of a hyperelliptic curve.
    Periods {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Abel map of a point from the first branch point.
    Abelmap {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Numerical Jacobi inversion of a Jacobian point.
    Invert {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Riemann constants of the curve.
    Constants {
        #[command(flatten)]
        io: IoArgs,
    },
}

#[derive(Subcommand)]
enum BuildersCommand {
    /// Normalized third-kind differential: b-periods and checks.
    Thirdkind {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Baker-Akhiezer function evaluation.
    Ba {
        #[command(flatten)]
        io: IoArgs,
    },
}

#[derive(Subcommand)]
enum PdeCommand {
    /// Evaluate the sine-Gordon solution formula on a grid.
    SgEval {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Fit sine-Gordon wave vectors by residual minimization.
    SgFit {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Evaluate the Landau-Lifshitz spin components on a grid.
    LlEval {
        #[command(flatten)]
        io: IoArgs,
    },
}

#[derive(Subcommand)]
enum KirchhoffCommand {
    /// Integrate the Kirchhoff equations with conservation diagnostics.
    Integrate {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Clebsch spectral reduction data.
    Spectrum {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Reduced (s1, s2) flow.
    Sflow {
        #[command(flatten)]
        io: IoArgs,
    },
}

enum CliError {
    /// Configuration or validation problem: exit code 2.
    Config(String),
    /// Numerical failure inside a module: exit code 3.
    Numeric(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numeric(m) | CliError::Io(m) => m,
        }
    }
}

fn load_config<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("bad config: {e}")))
}

fn tolerance(io: &IoArgs) -> Result<Tolerance, CliError> {
    if !(io.eps > 0.0 && io.eps < 1.0) {
        return Err(CliError::Config("--eps must lie in (0, 1)".into()));
    }
    Ok(Tolerance::with_eps(io.eps))
}

fn numeric<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Numeric(e.to_string())
}

fn invalid(e: String) -> CliError {
    CliError::Config(e)
}

fn emit(table: &Table, out: Option<&PathBuf>, ndjson: bool) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let mut file = fs::File::create(path)
                .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
            table
                .write(&mut file, ndjson)
                .map_err(|e| CliError::Io(e.to_string()))
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            match table.write(&mut lock, ndjson) {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                other => other.map_err(|e| CliError::Io(e.to_string())),
            }
        }
    }
}

fn scaled_row(v: &thetakit::ScaledComplex) -> (f64, f64, f64) {
    let plain = v.to_complex();
    (plain.re, plain.im, v.log_abs())
}

fn theta_eval(io: &IoArgs) -> Result<Table, CliError> {
    let cfg: ThetaEvalConfig = load_config(&io.config)?;
    let tol = tolerance(io)?;
    let b = riemann_matrix(&cfg.b).map_err(invalid)?;
    let z = cvec(&cfg.z);
    let chr = cfg
        .characteristic
        .as_ref()
        .map(|c| c.build())
        .unwrap_or_else(|| Characteristic::zero(b.genus()));
    let value = match &cfg.derivative {
        Some(k) => theta_derivative(k, &chr, &z, &b, &tol).map_err(numeric)?,
        None => theta_char(&chr, &z, &b, &tol).map_err(numeric)?,
    };
    let (re, im, log_abs) = scaled_row(&value);
    let mut table = Table::new(vec!["re", "im", "log_abs"]);
    table.push(vec![Value::Float(re), Value::Float(im), Value::Float(log_abs)]);
    Ok(table)
}

fn theta_grid(io: &IoArgs) -> Result<Table, CliError> {
    let cfg: ThetaGridConfig = load_config(&io.config)?;
    let tol = tolerance(io)?;
    let b = riemann_matrix(&cfg.b).map_err(invalid)?;
    let z0 = cvec(&cfg.z_start);
    let dz = cvec(&cfg.z_step);
    if z0.len() != b.genus() || dz.len() != b.genus() {
        return Err(invalid("z_start/z_step must have genus entries".into()));
    }
    let chr = cfg
        .characteristic
        .as_ref()
        .map(|c| c.build())
        .unwrap_or_else(|| Characteristic::zero(b.genus()));
    let rows: Result<Vec<_>, _> = (0..cfg.count)
        .into_par_iter()
        .map(|i| {
            let z: Vec<Complex64> = z0
                .iter()
                .zip(&dz)
                .map(|(a, d)| a + d * i as f64)
                .collect();
            theta_char(&chr, &z, &b, &tol).map(|v| (i, v))
        })
        .collect();
    let rows = rows.map_err(numeric)?;
    let mut table = Table::new(vec!["index", "re", "im", "log_abs"]);
    for (i, v) in rows {
        let (re, im, log_abs) = scaled_row(&v);
        table.push(vec![
            Value::Int(i as i64),
            Value::Float(re),
            Value::Float(im),
            Value::Float(log_abs),
        ]);
    }
    Ok(table)
}

fn theta_halfperiods(genus: usize) -> Result<Table, CliError> {
    let all = enumerate_half_periods(genus).map_err(|e| invalid(e.to_string()))?;
    let mut table = Table::new(vec!["alpha", "beta", "parity"]);
    for (chr, parity) in all {
        let fmt = |v: &[f64]| {
            v.iter()
                .map(|x| if *x > 0.25 { "1/2" } else { "0" })
                .collect::<Vec<_>>()
                .join(";")
        };
        table.push(vec![
            Value::Text(fmt(&chr.alpha)),
            Value::Text(fmt(&chr.beta)),
            Value::Text(
                match parity {
                    Parity::Even => "even",
                    Parity::Odd => "odd",
                }
                .into(),
            ),
        ]);
    }
    Ok(table)
}

fn elliptic_wp(io: &IoArgs) -> Result<Table, CliError> {
    let cfg: WpConfig = load_config(&io.config)?;
    let tol = tolerance(io)?;
    let lat = Lattice::new(c64(cfg.lattice.omega1), c64(cfg.lattice.omega2))
        .map_err(|e| invalid(e.to_string()))?;
    let mut table = Table::new(vec!["z_re", "z_im", "wp_re", "wp_im", "wp_prime_re", "wp_prime_im"]);
    for &zp in &cfg.z {
        let z = c64(zp);
        let p = weierstrass_p(z, &lat, &tol).map_err(numeric)?;
        let pp = weierstrass_p_prime(z, &lat, &tol).map_err(numeric)?;
        table.push(vec![
            Value::Float(z.re),
            Value::Float(z.im),
            Value::Float(p.re),
            Value::Float(p.im),
            Value::Float(pp.re),
            Value::Float(pp.im),
        ]);
    }
    Ok(table)
}

fn elliptic_invariants(io: &IoArgs) -> Result<Table, CliError> {
    let cfg: LatticeConfig = load_config(&io.config)?;
    let tol = tolerance(io)?;
    let lat = Lattice::new(c64(cfg.omega1), c64(cfg.omega2)).map_err(|e| invalid(e.to_string()))?;
    let inv = wp_invariants(&lat, &tol).map_err(numeric)?;
    let mut table = Table::new(vec!["g2_re", "g2_im", "g3_re", "g3_im"]);
    table.push(vec![
        Value::Float(inv.g2.re),
        Value::Float(inv.g2.im),
        Value::Float(inv.g3.re),
        Value::Float(inv.g3.im),
    ]);
    Ok(table)
}

fn elliptic_build(io: &IoArgs) -> Result<Table, CliError> {
    let cfg: EllipticBuildConfig = load_config(&io.config)?;
    let tol = tolerance(io)?;
    let modulus = EllipticModulus::new(c64(cfg.b)).map_err(|e| invalid(e.to_string()))?;
    let mut table = Table::new(vec!["z_re", "z_im", "f_re", "f_im"]);
    match cfg.kind.as_str() {
        "divisor" => {
            let f = elliptic_from_divisor(
                &cvec(&cfg.zeros),
                &cvec(&cfg.poles),
                &modulus,
                c64(cfg.constant),
                &tol,
            )
            .map_err(numeric)?;
            for &zp in &cfg.eval_points {
                let z = c64(zp);
                let v = f.evaluate(z).map_err(numeric)?;
                table.push(vec![
                    Value::Float(z.re),
                    Value::Float(z.im),
                    Value::Float(v.re),
                    Value::Float(v.im),
                ]);
            }
        }
        "poles" => {
            let f = elliptic_from_poles(
                &cvec(&cfg.poles),
                &cvec(&cfg.residues),
                &modulus,
                c64(cfg.constant),
                &tol,
            )
            .map_err(numeric)?;
            for &zp in &cfg.eval_points {
                let z = c64(zp);
                let v = f.evaluate(z).map_err(numeric)?;
                table.push(vec![
                    Value::Float(z.re),
                    Value::Float(z.im),
                    Value::Float(v.re),
                    Value::Float(v.im),
                ]);
            }
        }
        other => return Err(invalid(format!("unknown build kind '{other}'"))),
    }
    Ok(table)
}

fn curve_periods(io: &IoArgs) -> Result<Table, CliError> {
    let cfg: CurveConfig = load_config(&io.config)?;
    let tol = tolerance(io)?;
    let curve = build_curve(&cvec(&cfg.branch_points)).map_err(|e| invalid(e.to_string()))?;
    let pd = period_matrix(&curve, &tol).map_err(numeric)?;
    let g = curve.genus();
    let mut table = Table::new(vec!["block", "row", "col", "re", "im"]);
    let push_block = |name: &str, data: &[Complex64], table: &mut Table| {
        for r in 0..g {
            for c in 0..g {
                let v = data[r * g + c];
                table.push(vec![
                    Value::Text(name.into()),
                    Value::Int(r as i64),
                    Value::Int(c as i64),
                    Value::Float(v.re),
                    Value::Float(v.im),
                ]);
            }
        }
    };
    push_block("a_periods", &pd.a_periods, &mut table);
    push_block("b_periods", &pd.b_periods, &mut table);
    push_block("riemann_matrix", pd.riemann_matrix().entries(), &mut table);
    Ok(table)
}

fn curve_abelmap(io: &IoArgs) -> Result<Table, CliError> {
    let cfg: AbelMapConfig = load_config(&io.config)?;
    let tol = tolerance(io)?;
    let curve = build_curve(&cvec(&cfg.branch_points)).map_err(|e| invalid(e.to_string()))?;
    let pd = period_matrix(&curve, &tol).map_err(numeric)?;
    let p = cfg.point.build().map_err(invalid)?;
    let p0 = CurvePoint::plus(curve.base_point());
    let phi = abel_map(&curve, &pd, &p, &p0, &tol).map_err(numeric)?;
    let mut table = Table::new(vec!["component", "re", "im"]);
    for (j, v) in phi.iter().enumerate() {
        table.push(vec![
            Value::Int(j as i64),
            Value::Float(v.re),
            Value::Float(v.im),
        ]);
    }
    Ok(table)
}

fn curve_invert(io: &IoArgs) -> Result<Table, CliError> {
    let cfg: InvertConfig = load_config(&io.config)?;
    let tol = tolerance(io)?;
    let curve = build_curve(&cvec(&cfg.branch_points)).map_err(|e| invalid(e.to_string()))?;
    let pd = period_matrix(&curve, &tol).map_err(numeric)?;
    let z = cvec(&cfg.z);
    let divisor = jacobi_inversion(&curve, &pd, &z, &tol).map_err(numeric)?;
    let mut table = Table::new(vec!["xi_re", "xi_im", "sheet", "multiplicity"]);
    for (p, mult) in &divisor.points {
        table.push(vec![
            Value::Float(p.xi.re),
            Value::Float(p.xi.im),
            Value::Text(
                match p.sheet {
                    Sheet::Plus => "plus",
                    Sheet::Minus => "minus",
                }
                .into(),
            ),
            Value::Int(*mult),
        ]);
    }
    Ok(table)
}

fn curve_constants(io: &IoArgs) -> Result<Table, CliError> {
    let cfg: CurveConfig = load_config(&io.config)?;
    let tol = tolerance(io)?;
    let curve = build_curve(&cvec(&cfg.branch_points)).map_err(|e| invalid(e.to_string()))?;
    let pd = period_matrix(&curve, &tol).map_err(numeric)?;
    let rc = riemann_constants(&curve, &pd);
    let mut table = Table::new(vec!["component", "re", "im"]);
    for (j, v) in rc.delta.iter().enumerate() {
        table.push(vec![
            Value::Int(j as i64),
            Value::Float(v.re),
            Value::Float(v.im),
        ]);
    }
    Ok(table)
}

fn builders_thirdkind(io: &IoArgs) -> Result<Table, CliError> {
    let cfg: ThirdKindConfig = load_config(&io.config)?;
    let tol = tolerance(io)?;
    let curve = build_curve(&cvec(&cfg.branch_points)).map_err(|e| invalid(e.to_string()))?;
    let pd = period_matrix(&curve, &tol).map_err(numeric)?;
    let p = cfg.pole_plus.build().map_err(invalid)?;
    let q = cfg.pole_minus.build().map_err(invalid)?;
    let eta = third_kind(&curve, &pd, &p, &q, &tol).map_err(numeric)?;
    let mut table = Table::new(vec!["kind", "index", "re", "im"]);
    for (j, u) in eta.u_periods.iter().enumerate() {
        table.push(vec![
            Value::Text("b_period".into()),
            Value::Int(j as i64),
            Value::Float(u.re),
            Value::Float(u.im),
        ]);
    }
    for (j, c) in eta.normalization_coeffs.iter().enumerate() {
        table.push(vec![
            Value::Text("normalization".into()),
            Value::Int(j as i64),
            Value::Float(c.re),
            Value::Float(c.im),
        ]);
    }
    Ok(table)
}

fn builders_ba(io: &IoArgs) -> Result<Table, CliError> {
    let cfg: BaConfig = load_config(&io.config)?;
    let tol = tolerance(io)?;
    let curve = build_curve(&cvec(&cfg.branch_points)).map_err(|e| invalid(e.to_string()))?;
    let pd = period_matrix(&curve, &tol).map_err(numeric)?;
    let mut divisor_points = Vec::new();
    for ps in &cfg.divisor {
        divisor_points.push(ps.build().map_err(invalid)?);
    }
    let data = BAData {
        divisor: Divisor::of_points(&divisor_points),
        singular_point: cfg.singular_point.build().map_err(invalid)?,
        principal: cvec(&cfg.principal),
    };
    let sk = second_kind(&curve, &pd, &data.singular_point, &data.principal, &tol)
        .map_err(numeric)?;
    let psi = baker_akhiezer(&curve, &pd, &data, &sk, &tol).map_err(numeric)?;
    let mut table = Table::new(vec!["xi_re", "xi_im", "sheet", "re", "im", "log_abs"]);
    for ps in &cfg.eval_points {
        let p = ps.build().map_err(invalid)?;
        let v = psi.evaluate(&p).map_err(numeric)?;
        let (re, im, log_abs) = scaled_row(&v);
        table.push(vec![
            Value::Float(p.xi.re),
            Value::Float(p.xi.im),
            Value::Text(ps.sheet.clone()),
            Value::Float(re),
            Value::Float(im),
            Value::Float(log_abs),
        ]);
    }
    Ok(table)
}

fn pde_sg_eval(io: &IoArgs) -> Result<Table, CliError> {
    let cfg: SgEvalConfig = load_config(&io.config)?;
    let tol = tolerance(io)?;
    let wave = cfg.wave.build().map_err(invalid)?;
    let grid = cfg.grid.build();
    let rows = sine_gordon_eval_grid(&grid, &wave, &tol).map_err(numeric)?;
    let mut table = Table::new(vec!["x", "t", "phi_re", "phi_im"]);
    for (j, &t) in grid.ts.iter().enumerate() {
        for (i, &x) in grid.xs.iter().enumerate() {
            let v = rows[j][i];
            table.push(vec![
                Value::Float(x),
                Value::Float(t),
                Value::Float(v.re),
                Value::Float(v.im),
            ]);
        }
    }
    Ok(table)
}

fn pde_sg_fit(io: &IoArgs) -> Result<Table, CliError> {
    let cfg: SgFitConfig = load_config(&io.config)?;
    let tol = tolerance(io)?;
    let initial = cfg.initial.build().map_err(invalid)?;
    let grid = cfg.grid.build();
    let out = fit_wave_vectors(&initial.b.clone(), &initial, &grid, cfg.budget, &tol)
        .map_err(numeric)?;
    let mut table = Table::new(vec![
        "u_re",
        "u_im",
        "v_re",
        "v_im",
        "w_re",
        "w_im",
        "c_offset",
        "residual",
        "success",
        "evaluations",
    ]);
    table.push(vec![
        Value::Float(out.wave.u[0].re),
        Value::Float(out.wave.u[0].im),
        Value::Float(out.wave.v[0].re),
        Value::Float(out.wave.v[0].im),
        Value::Float(out.wave.w[0].re),
        Value::Float(out.wave.w[0].im),
        Value::Float(out.wave.c_offset),
        Value::Float(out.residual),
        Value::Int(out.success as i64),
        Value::Int(out.evaluations as i64),
    ]);
    Ok(table)
}

fn pde_ll_eval(io: &IoArgs) -> Result<Table, CliError> {
    let cfg: LlEvalConfig = load_config(&io.config)?;
    let tol = tolerance(io)?;
    let data = cfg.build().map_err(invalid)?;
    let grid = cfg.grid.build();
    let mut table = Table::new(vec![
        "x", "t", "s1_re", "s1_im", "s2_re", "s2_im", "s3_re", "s3_im",
    ]);
    for &t in &grid.ts {
        for &x in &grid.xs {
            let (s1, s2, s3) = landau_lifshitz_eval(x, t, &data, &tol).map_err(numeric)?;
            table.push(vec![
                Value::Float(x),
                Value::Float(t),
                Value::Float(s1.re),
                Value::Float(s1.im),
                Value::Float(s2.re),
                Value::Float(s2.im),
                Value::Float(s3.re),
                Value::Float(s3.im),
            ]);
        }
    }
    Ok(table)
}

fn kirchhoff_integrate(io: &IoArgs) -> Result<Table, CliError> {
    let cfg: KirchhoffIntegrateConfig = load_config(&io.config)?;
    let (case, initial, method) = cfg.build().map_err(invalid)?;
    let traj = match &case {
        KirchhoffCase::Clebsch(p) => integrate(&initial, p, cfg.t_end, cfg.step, method),
        KirchhoffCase::Steklov(p) => integrate(&initial, p, cfg.t_end, cfg.step, method),
    }
    .map_err(numeric)?;
    let mut table = Table::new(vec![
        "t", "p1", "p2", "p3", "l1", "l2", "l3", "h1", "h2", "h3", "h4",
    ]);
    for (i, t) in traj.times.iter().enumerate() {
        if i % cfg.sample_every != 0 && i != traj.times.len() - 1 {
            continue;
        }
        let s = &traj.states[i];
        let h = &traj.integrals[i];
        table.push(vec![
            Value::Float(*t),
            Value::Float(s.p[0]),
            Value::Float(s.p[1]),
            Value::Float(s.p[2]),
            Value::Float(s.l[0]),
            Value::Float(s.l[1]),
            Value::Float(s.l[2]),
            Value::Float(h[0]),
            Value::Float(h[1]),
            Value::Float(h[2]),
            Value::Float(h[3]),
        ]);
    }
    Ok(table)
}

fn kirchhoff_spectrum(io: &IoArgs) -> Result<Table, CliError> {
    let cfg: SpectrumConfig = load_config(&io.config)?;
    let spec = clebsch_spectrum(
        (
            cfg.constants[0],
            cfg.constants[1],
            cfg.constants[2],
            cfg.constants[3],
        ),
        cfg.b,
    )
    .map_err(numeric)?;
    let mut table = Table::new(vec!["kind", "index", "re", "im"]);
    for (j, z) in spec.z_roots.iter().enumerate() {
        table.push(vec![
            Value::Text("z_root".into()),
            Value::Int(j as i64),
            Value::Float(z.re),
            Value::Float(z.im),
        ]);
    }
    for (j, nu) in spec.nu.iter().enumerate() {
        table.push(vec![
            Value::Text("nu".into()),
            Value::Int(j as i64),
            Value::Float(nu.re),
            Value::Float(nu.im),
        ]);
    }
    for (j, c) in spec.p5_coeffs.iter().enumerate() {
        table.push(vec![
            Value::Text("p5_coeff".into()),
            Value::Int(j as i64),
            Value::Float(c.re),
            Value::Float(c.im),
        ]);
    }
    Ok(table)
}

fn kirchhoff_sflow(io: &IoArgs) -> Result<Table, CliError> {
    let cfg: SFlowConfig = load_config(&io.config)?;
    let spec = clebsch_spectrum(
        (
            cfg.constants[0],
            cfg.constants[1],
            cfg.constants[2],
            cfg.constants[3],
        ),
        cfg.b,
    )
    .map_err(numeric)?;
    let traj = s_flow(
        &spec,
        cfg.a_const,
        cfg.b_const,
        (c64(cfg.initial[0]), c64(cfg.initial[1])),
        cfg.t_end,
        cfg.step,
    )
    .map_err(numeric)?;
    let mut table = Table::new(vec!["t", "s1_re", "s1_im", "s2_re", "s2_im"]);
    for (i, t) in traj.times.iter().enumerate() {
        if i % cfg.sample_every != 0 && i != traj.times.len() - 1 {
            continue;
        }
        table.push(vec![
            Value::Float(*t),
            Value::Float(traj.s1[i].re),
            Value::Float(traj.s1[i].im),
            Value::Float(traj.s2[i].re),
            Value::Float(traj.s2[i].im),
        ]);
    }
    Ok(table)
}

fn selftest(seed: u64, json: bool, out: Option<PathBuf>) -> Result<bool, CliError> {
    let start = std::time::Instant::now();
    let reports = run_all(&SelftestConfig { seed });
    let mut table = Table::new(vec!["criterion", "name", "passed", "seconds", "detail"]);
    let mut all_ok = true;
    for r in &reports {
        all_ok &= r.passed;
        table.push(vec![
            Value::Int(r.id as i64),
            Value::Text(r.name.into()),
            Value::Int(r.passed as i64),
            Value::Float(r.seconds),
            Value::Text(r.detail.clone()),
        ]);
        eprintln!(
            "criterion {:>2} [{}] {} ({:.2}s): {}",
            r.id,
            if r.passed { "pass" } else { "FAIL" },
            r.name,
            r.seconds,
            r.detail
        );
    }
    let total = start.elapsed().as_secs_f64();
    let runtime_ok = total < 600.0;
    table.push(vec![
        Value::Int(17),
        Value::Text("end-to-end runtime".into()),
        Value::Int(runtime_ok as i64),
        Value::Float(total),
        Value::Text(format!("{total:.1} s (budget 600 s)")),
    ]);
    eprintln!(
        "criterion 17 [{}] end-to-end runtime: {total:.1} s",
        if runtime_ok { "pass" } else { "FAIL" }
    );
    emit(&table, out.as_ref(), json)?;
    Ok(all_ok && runtime_ok)
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    // THETAKIT_THREADS caps the rayon pool used by grid commands.
    if let Ok(threads) = std::env::var("THETAKIT_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
    let (table, io) = match &cli.command {
        Command::Theta { sub } => match sub {
            ThetaCommand::Eval { io } => (theta_eval(io)?, io.clone()),
            ThetaCommand::Grid { io } => (theta_grid(io)?, io.clone()),
            ThetaCommand::Halfperiods { genus, out, json } => {
                let table = theta_halfperiods(*genus)?;
                return emit(&table, out.as_ref(), *json);
            }
        },
        Command::Elliptic { sub } => match sub {
            EllipticCommand::Wp { io } => (elliptic_wp(io)?, io.clone()),
            EllipticCommand::Invariants { io } => (elliptic_invariants(io)?, io.clone()),
            EllipticCommand::Build { io } => (elliptic_build(io)?, io.clone()),
        },
        Command::Curve { sub } => match sub {
            CurveCommand::Periods { io } => (curve_periods(io)?, io.clone()),
            CurveCommand::Abelmap { io } => (curve_abelmap(io)?, io.clone()),
            CurveCommand::Invert { io } => (curve_invert(io)?, io.clone()),
            CurveCommand::Constants { io } => (curve_constants(io)?, io.clone()),
        },
        Command::Builders { sub } => match sub {
            BuildersCommand::Thirdkind { io } => (builders_thirdkind(io)?, io.clone()),
            BuildersCommand::Ba { io } => (builders_ba(io)?, io.clone()),
        },
        Command::Pde { sub } => match sub {
            PdeCommand::SgEval { io } => (pde_sg_eval(io)?, io.clone()),
            PdeCommand::SgFit { io } => (pde_sg_fit(io)?, io.clone()),
            PdeCommand::LlEval { io } => (pde_ll_eval(io)?, io.clone()),
        },
        Command::Kirchhoff { sub } => match sub {
            KirchhoffCommand::Integrate { io } => (kirchhoff_integrate(io)?, io.clone()),
            KirchhoffCommand::Spectrum { io } => (kirchhoff_spectrum(io)?, io.clone()),
            KirchhoffCommand::Sflow { io } => (kirchhoff_sflow(io)?, io.clone()),
        },
        Command::Selftest { seed, json, out } => {
            let ok = selftest(*seed, *json, out.clone())?;
            if ok {
                return Ok(());
            }
            return Err(CliError::Numeric("selftest reported failures".into()));
        }
    };
    emit(&table, io.out.as_ref(), io.json)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
