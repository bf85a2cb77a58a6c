use btriple::boundary::verify::{complex_grid, krein_residual};
use btriple::boundary::{dtn as dtn_map, verify_suite, BoundaryCalculus, Faulty, VerificationReport, VerifyConfig};
use btriple::config::{ModelKind, Scheme};
use btriple::dirac::{dirac_suite, DiracInterval};
use btriple::discrete::{convergence_study, discrete_suite, discretize, DiscreteModel, FluxKind};
use btriple::graph::{robin_spectrum_direct, GraphFunction, MetricGraph};
use btriple::numeric::linalg::{is_hermitian, CMatrix};
use btriple::numeric::{Root, ScanConfig};
use btriple::report::{Cell, Check, CheckStatus, Report, Table};
use btriple::{exec, Error, Result};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::{Context, FluxArg, Method, Probe, SchemeArg};

fn echo(ctx: &Context, options: Value) -> Value {
    json!({ "model": ctx.config, "options": options })
}

fn graph(ctx: &Context) -> Result<MetricGraph> {
    MetricGraph::from_config(&ctx.config)
}

fn continuum_only(ctx: &Context, task: &str) -> Result<MetricGraph> {
    if ctx.config.kind == ModelKind::Discrete {
        return Err(Error::config("type", format!("{task} requires a continuum model (interval or metric_graph)")));
    }
    graph(ctx)
}

fn discrete_model(ctx: &Context) -> Result<DiscreteModel> {
    let d = ctx.config.discretization.ok_or_else(|| Error::config("discretization", "required for type = discrete"))?;
    discretize(&graph(ctx)?, d.n_per_edge, d.scheme)
}

fn flux_kind(f: FluxArg) -> FluxKind {
    match f {
        FluxArg::Stiffness => FluxKind::Stiffness,
        FluxArg::Consistent => FluxKind::Consistent,
    }
}

/// `re` or `re,im`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let bad = || Error::config("z", format!("expected `re` or `re,im`, got {s:?}"));
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| p.parse::<f64>().map_err(|_| bad());
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(bad()),
    }
}

/// `zero`, `identity`, a real scalar, or a JSON matrix whose entries are numbers or `[re, im]`.
pub fn parse_robin(text: &str, m: usize) -> Result<CMatrix> {
    let bad = |msg: String| Error::config("robin", msg);
    let s = text.trim();
    let b = match s {
        "zero" => CMatrix::zeros(m, m),
        "identity" => CMatrix::identity(m, m),
        _ => {
            if let Ok(x) = s.parse::<f64>() {
                CMatrix::identity(m, m) * Complex64::new(x, 0.0)
            } else {
                let v: Value = serde_json::from_str(s).map_err(|e| bad(format!("not a matrix: {e}")))?;
                let rows = v.as_array().ok_or_else(|| bad("expected an array of rows".into()))?;
                if rows.len() != m {
                    return Err(bad(format!("expected {m} rows, got {}", rows.len())));
                }
                let mut b = CMatrix::zeros(m, m);
                for (i, row) in rows.iter().enumerate() {
                    let row = row
                        .as_array()
                        .filter(|r| r.len() == m)
                        .ok_or_else(|| bad(format!("row {i} must have {m} entries")))?;
                    for (j, e) in row.iter().enumerate() {
                        b[(i, j)] = match e {
                            Value::Number(x) => Complex64::new(x.as_f64().unwrap_or(f64::NAN), 0.0),
                            Value::Array(p) if p.len() == 2 => Complex64::new(
                                p[0].as_f64().ok_or_else(|| bad(format!("entry ({i}, {j})")))?,
                                p[1].as_f64().ok_or_else(|| bad(format!("entry ({i}, {j})")))?,
                            ),
                            _ => return Err(bad(format!("entry ({i}, {j}) must be a number or [re, im]"))),
                        };
                    }
                }
                b
            }
        }
    };
    if b.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(bad("entries must be finite".into()));
    }
    if !is_hermitian(&b, 1e-12) {
        return Err(bad("matrix must be Hermitian".into()));
    }
    Ok(b)
}

fn push_checks(report: &mut Report, suite: VerificationReport) {
    report.checks.extend(suite.checks);
}

pub fn verify(ctx: &Context, samples: usize, seed: u64) -> Result<Report> {
    let mut report = Report::new("verify", echo(ctx, json!({ "samples": samples, "seed": seed })));
    match ctx.config.kind {
        ModelKind::Discrete => {
            if ctx.config.inject_fault.is_some() {
                return Err(Error::config("inject_fault", "not supported for discrete models"));
            }
            let model = discrete_model(ctx)?;
            report.values.insert("vertices".into(), Cell::Int(model.vertex_count() as i64));
            report.values.insert("edges".into(), Cell::Int(model.edge_count() as i64));
            push_checks(&mut report, discrete_suite(&model, ctx.tolerance_scale)?);
        }
        _ => {
            let graph = graph(ctx)?;
            let cfg = VerifyConfig {
                samples,
                seed,
                tolerance_scale: ctx.tolerance_scale,
                exec: ctx.exec,
                ..VerifyConfig::default()
            };
            report.values.insert("window_min".into(), Cell::Float(cfg.window.0));
            report.values.insert("window_max".into(), Cell::Float(cfg.window.1));
            let suite = match ctx.config.inject_fault {
                None => verify_suite(&graph, &cfg)?,
                Some(f) => verify_suite(&Faulty::new(graph, f), &cfg)?,
            };
            push_checks(&mut report, suite);
        }
    }
    Ok(report)
}

fn dtn_points(z: &[String], grid: Option<&[f64]>) -> Result<Vec<Complex64>> {
    let mut zs: Vec<Complex64> = z.iter().map(|s| parse_complex(s)).collect::<Result<_>>()?;
    if let Some(g) = grid {
        let count = |x: f64, name: &str| -> Result<usize> {
            if x >= 1.0 && x.fract() == 0.0 {
                Ok(x as usize)
            } else {
                Err(Error::config("grid", format!("{name} must be a positive integer")))
            }
        };
        let (nre, nim) = (count(g[2], "n_re")?, count(g[5], "n_im")?);
        let at = |a: f64, b: f64, n: usize, k: usize| if n == 1 { a } else { a + (b - a) * k as f64 / (n - 1) as f64 };
        for i in 0..nre {
            for j in 0..nim {
                zs.push(Complex64::new(at(g[0], g[1], nre, i), at(g[3], g[4], nim, j)));
            }
        }
    }
    if zs.is_empty() {
        zs.push(Complex64::new(-1.0, 0.0));
    }
    Ok(zs)
}

pub fn dtn(ctx: &Context, z: &[String], grid: Option<&[f64]>, flux: FluxArg) -> Result<Report> {
    let zs = dtn_points(z, grid)?;
    let options = json!({
        "z": zs.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        "flux": if ctx.config.kind == ModelKind::Discrete { Some(format!("{flux:?}").to_lowercase()) } else { None },
    });
    let mut report = Report::new("dtn", echo(ctx, options));
    let results: Vec<Result<CMatrix>> = match ctx.config.kind {
        ModelKind::Discrete => {
            let model = discrete_model(ctx)?;
            exec::map(ctx.exec, &zs, |z| model.flux_dtn(*z, flux_kind(flux)))
        }
        _ => {
            let graph = graph(ctx)?;
            exec::map(ctx.exec, &zs, |z| dtn_map(&graph, *z).map(|d| d.entries))
        }
    };
    let mut table = Table::new(&["z_re", "z_im", "row", "col", "entry_re", "entry_im"]);
    let mut skipped = Table::new(&["z_re", "z_im", "reason"]);
    let mut asym: f64 = 0.0;
    for (z, r) in zs.iter().zip(results) {
        match r {
            Ok(m) => {
                asym = asym.max((&m - m.transpose()).norm() / (1.0 + m.norm()));
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        table.push(vec![
                            z.re.into(),
                            z.im.into(),
                            Cell::Int(i as i64),
                            Cell::Int(j as i64),
                            m[(i, j)].re.into(),
                            m[(i, j)].im.into(),
                        ]);
                    }
                }
            }
            Err(e @ (Error::NearDirichletSpectrum { .. } | Error::SingularSystem { .. })) => {
                skipped.push(vec![z.re.into(), z.im.into(), Cell::Text(e.to_string())]);
            }
            Err(e) => return Err(e),
        }
    }
    report.checks.push(Check::measured("dtn_transpose_symmetry", "def:dn.z", asym, 1e-10 * ctx.tolerance_scale));
    report.tables.insert("dtn".into(), table);
    if !skipped.rows.is_empty() {
        report.tables.insert("skipped_points".into(), skipped);
    }
    Ok(report)
}

fn push_roots(table: &mut Table, roots: &[Root], method: &str) {
    for (k, r) in roots.iter().enumerate() {
        table.push(vec![
            Cell::Int(k as i64),
            r.value.into(),
            Cell::Int(r.multiplicity as i64),
            Cell::Text(method.into()),
        ]);
    }
}

fn list(roots: &[Root]) -> String {
    let items: Vec<String> = roots.iter().map(|r| format!("{:.10} (x{})", r.value, r.multiplicity)).collect();
    format!("[{}]", items.join(", "))
}

pub fn spectrum(ctx: &Context, robin: &str, window: (f64, f64), method: Method) -> Result<Report> {
    let graph = continuum_only(ctx, "spectrum")?;
    if !(window.0 <= window.1) || !window.0.is_finite() || !window.1.is_finite() {
        return Err(Error::config("window", "expected two finite numbers a <= b"));
    }
    let b = parse_robin(robin, graph.boundary_dim())?;
    let options =
        json!({ "robin": robin, "window": [window.0, window.1], "method": format!("{method:?}").to_lowercase() });
    let mut report = Report::new("spectrum", echo(ctx, options));
    let mut table = Table::new(&["index", "eigenvalue", "multiplicity", "method"]);
    if method == Method::Direct {
        let roots = robin_spectrum_direct(&graph, &b, window, &ScanConfig { exec: ctx.exec, ..ScanConfig::default() })?;
        push_roots(&mut table, &roots, "direct");
        report.tables.insert("spectra".into(), table);
        return Ok(report);
    }
    let calc = BoundaryCalculus::new(&graph)?;
    let robin = calc.robin(&b)?;
    let result = calc.spectral_relation_scan(&robin, window)?;
    push_roots(&mut table, &result.dtn_roots, "dtn");
    report.values.insert("dirichlet_points_excluded".into(), Cell::Text(list(&result.dirichlet_points_excluded)));
    if method == Method::Both {
        let direct = result.direct_eigenvalues.clone().unwrap_or_default();
        push_roots(&mut table, &direct, "direct");
        report.values.insert("embedded".into(), Cell::Text(list(&result.embedded)));
        let tol = 1e-6 * ctx.tolerance_scale;
        let note = format!(
            "matched {}; embedded in the Dirichlet spectrum {}; unmatched dtn roots {}; unmatched direct eigenvalues {}",
            result.matched.len(),
            list(&result.embedded),
            list(&result.unmatched_dtn),
            list(&result.unmatched_direct)
        );
        let mut check =
            Check::measured("spectral_correspondence", "thm:krein.dn", result.max_gap(), tol).with_note(note);
        if !result.unmatched_dtn.is_empty() || !result.unmatched_direct.is_empty() {
            check.status = CheckStatus::Fail;
        }
        report.checks.push(check);
    }
    report.tables.insert("spectra".into(), table);
    Ok(report)
}

pub fn krein(ctx: &Context, robin: &str, probe: Probe, seed: u64) -> Result<Report> {
    let graph = continuum_only(ctx, "krein")?;
    let b = parse_robin(robin, graph.boundary_dim())?;
    let options = json!({ "robin": robin, "probe": format!("{probe:?}").to_lowercase(), "seed": seed });
    let mut report = Report::new("krein", echo(ctx, options));
    let calc = BoundaryCalculus::new(&graph)?;
    let robin = calc.robin(&b)?;
    let h = match probe {
        Probe::One => GraphFunction::constant(Complex64::new(1.0, 0.0)),
        Probe::Random => graph.random_function(&mut ChaCha8Rng::seed_from_u64(seed), false),
    };
    let zs = complex_grid();
    let residuals = exec::map(ctx.exec, &zs, |z| krein_residual(&graph, &calc, &robin, *z, &h));
    let mut table = Table::new(&["z_re", "z_im", "residual"]);
    let mut worst: f64 = 0.0;
    for (z, r) in zs.iter().zip(residuals) {
        let r = r?;
        worst = if r.is_nan() { f64::NAN } else { worst.max(r) };
        table.push(vec![z.re.into(), z.im.into(), r.into()]);
    }
    report.checks.push(Check::measured("krein_formula", "thm:krein", worst, 1e-7 * ctx.tolerance_scale));
    report.tables.insert("krein".into(), table);
    Ok(report)
}

pub fn dirac(ctx: &Context, samples: usize, seed: u64) -> Result<Report> {
    let model = DiracInterval::new(continuum_only(ctx, "dirac")?)?;
    let mut report = Report::new("dirac", echo(ctx, json!({ "samples": samples, "seed": seed })));
    let cfg =
        VerifyConfig { samples, seed, tolerance_scale: ctx.tolerance_scale, exec: ctx.exec, ..VerifyConfig::default() };
    let (dp, dm) = model.defect_dimensions();
    report.values.insert("dim_n_plus_i".into(), Cell::Int(dp as i64));
    report.values.insert("dim_n_minus_i".into(), Cell::Int(dm as i64));
    push_checks(&mut report, dirac_suite(&model, &cfg)?);
    Ok(report)
}

pub fn converge(ctx: &Context, levels: &[usize], z: &str, scheme: Option<SchemeArg>, flux: FluxArg) -> Result<Report> {
    let graph = graph(ctx)?;
    let z = parse_complex(z)?;
    if levels.contains(&0) {
        return Err(Error::config("levels", "every level must be >= 1"));
    }
    let scheme = match scheme {
        Some(SchemeArg::DecLumped) => Scheme::DecLumped,
        Some(SchemeArg::FemP1) => Scheme::FemP1,
        None => ctx.config.discretization.map_or(Scheme::FemP1, |d| d.scheme),
    };
    let options =
        json!({ "levels": levels, "z": [z.re, z.im], "scheme": scheme, "flux": format!("{flux:?}").to_lowercase() });
    let mut report = Report::new("converge", echo(ctx, options));
    let rows = convergence_study(&graph, z, levels, scheme, flux_kind(flux), ctx.exec)?;
    let mut table = Table::new(&["n", "h", "error", "rate"]);
    for r in &rows {
        table.push(vec![Cell::Int(r.n as i64), r.h.into(), r.error.into(), r.rate.map_or(Cell::Null, Cell::Float)]);
    }
    let rates: Vec<f64> = rows.iter().filter_map(|r| r.rate).collect();
    let rate_list = format!("{rates:?}");
    let check = if scheme == Scheme::FemP1 && flux == FluxArg::Consistent && !rates.is_empty() {
        let outside = rates
            .iter()
            .map(|&r| if r.is_nan() { f64::INFINITY } else { (1.7 - r).max(r - 2.3).max(0.0) })
            .fold(0.0, f64::max);
        Check::measured("convergence_rate", "lem:dn", outside, 0.0)
            .with_note(format!("rates {rate_list}, expected in [1.7, 2.3]"))
    } else {
        Check::skipped(
            "convergence_rate",
            "lem:dn",
            format!("rates {rate_list} reported, not asserted for this scheme/flux"),
        )
    };
    report.checks.push(check);
    report.tables.insert("convergence".into(), table);
    Ok(report)
}
