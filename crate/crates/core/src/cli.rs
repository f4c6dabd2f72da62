//! Command-line front end: flag parsing, case routing, grid auto-selection,
//! table validation, sweeps with persisted results, and data emission.
//!
//! Exit codes: 0 success, 1 a validation run found disagreement, 2 bad
//! usage or parameters, 3 numerical failure downstream.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::assembly::{assemble, ModeCase};
use crate::bdref::{assemble_bd, compare_spectra, radial_grid, Region};
use crate::eig::{condition_diagnostic, solve_qz, solve_qz_with, Spectrum};
use crate::grid::{CollocationGrid, GridSpec, Mapping};
use crate::output::{sibling, write_text, Format, Table};
use crate::stokes::{char_roots, eigenfunction, gram_matrix, modes, StokesKind};
use crate::{optimal, reference, Error, FlowParams, Result};

#[derive(Parser, Debug)]
#[command(
    name = "pipestab",
    version,
    about = "Temporal stability spectra and transient growth for pipe flow"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Eigenvalue spectrum (and optionally eigenfunctions) at one parameter point.
    Spectrum(SpectrumArgs),
    /// Recompute every embedded reference eigenvalue and grade the agreement.
    Validate(ValidateArgs),
    /// Inviscid transient-growth gains and optimal vortex/streak patterns.
    Optimal(OptimalArgs),
    /// Decay rates, eigenfunctions, and Gram matrix of the zero-wavenumber modes.
    Stokes(StokesArgs),
    /// Cross-check the spectrum against the radial-variable reference solver.
    BdCompare(BdCompareArgs),
    /// Batch spectra over a parameter grid, resumable through the results file.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

/// Radial mapping choice: look up the auto rule, or pin one.
#[derive(Clone, Copy, Debug)]
pub enum Stretch {
    Auto,
    Fixed(Mapping),
}

fn parse_stretch(s: &str) -> std::result::Result<Stretch, String> {
    match s {
        "auto" => Ok(Stretch::Auto),
        "linear" => Ok(Stretch::Fixed(Mapping::Linear)),
        other => {
            let a: f64 = other
                .parse()
                .map_err(|_| format!("expected auto, linear, or a stretch factor; got {other:?}"))?;
            if a > 1.0 && a.is_finite() {
                Ok(Stretch::Fixed(Mapping::Stretched { a }))
            } else {
                Err(format!("stretch factor must be finite and > 1; got {a}"))
            }
        }
    }
}

#[derive(Args, Clone, Debug)]
pub struct ParamArgs {
    /// Axial wavenumber.
    #[arg(long)]
    pub alpha: f64,
    /// Azimuthal wavenumber.
    #[arg(long)]
    pub n: i32,
    /// Reynolds number (centreline velocity and pipe radius scales).
    #[arg(long)]
    pub re: f64,
    /// Polynomial degree of the radial grid.
    #[arg(long = "N")]
    pub n_poly: usize,
    /// Radial mapping: auto, linear, or a stretch factor > 1.
    #[arg(long, default_value = "auto", value_parser = parse_stretch)]
    pub stretch: Stretch,
}

impl ParamArgs {
    fn to_params(&self) -> Result<FlowParams> {
        if self.n_poly < 16 {
            eprintln!(
                "warning: degree {} is below the trusted range; eigenvalues may be unresolved",
                self.n_poly
            );
        }
        let p = FlowParams::new(self.alpha, self.n, self.re, self.n_poly)?;
        Ok(match self.stretch {
            Stretch::Auto => p,
            Stretch::Fixed(m) => p.with_mapping(m),
        })
    }
}

fn mapping_desc(params: &FlowParams, forced: bool) -> String {
    let tag = if forced { "forced" } else { "auto" };
    match params.resolve_mapping() {
        Mapping::Linear => format!("linear ({tag})"),
        Mapping::Stretched { a } => format!("stretched a={a} ({tag})"),
    }
}

fn case_desc(case: ModeCase) -> &'static str {
    match case {
        ModeCase::General => "general",
        ModeCase::AxisymmetricFinite => "axisymmetric",
        ModeCase::AxisymmetricZero => "axially-uniform-axisymmetric",
    }
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Keep only the k least-decaying modes; with --out also emit their
    /// eigenfunctions to a sibling file.
    #[arg(long)]
    pub modes: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// Optional structured report path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OptimalArgs {
    /// Azimuthal wavenumber of the perturbation (nonzero).
    #[arg(long)]
    pub n: i32,
    /// Time horizon of the growth computation.
    #[arg(long)]
    pub t: f64,
    /// Polynomial degree of the radial grid.
    #[arg(long = "N", default_value_t = 64)]
    pub n_poly: usize,
    /// Angular samples per circle in the emitted patterns.
    #[arg(long, default_value_t = 64)]
    pub theta_samples: usize,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// Output path; stdout when omitted.  Pattern rasters land in sibling
    /// files.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct StokesArgs {
    /// Reynolds number converting decay rates to frequencies.
    #[arg(long)]
    pub re: f64,
    /// Series truncation order.
    #[arg(long, default_value_t = 90)]
    pub kmax: usize,
    /// Eigenfunctions and Gram matrix cover the first k modes per family.
    #[arg(long, default_value_t = 8)]
    pub modes: usize,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct BdCompareArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Degree of the radial-variable reference grid; defaults to --N.
    #[arg(long)]
    pub bd_n: Option<usize>,
    /// Comparison window; give all four or none (none = box around the
    /// least-decaying modes).
    #[arg(long)]
    pub re_min: Option<f64>,
    #[arg(long)]
    pub re_max: Option<f64>,
    #[arg(long)]
    pub im_min: Option<f64>,
    #[arg(long)]
    pub im_max: Option<f64>,
    /// Condition numbers are computed for this many matched pairs.
    #[arg(long, default_value_t = 12)]
    pub conditions: usize,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Key-value file with the parameter lists.
    #[arg(long)]
    pub config: PathBuf,
    /// Results file, one JSON record per line; existing records are reused.
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
}

/// Run a parsed command, print the error if any, and map it to an exit code.
pub fn run(cli: Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Params(_) | Error::Grid(_) => 2,
                _ => 3,
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Optimal(a) => cmd_optimal(a),
        Command::Stokes(a) => cmd_stokes(a),
        Command::BdCompare(a) => cmd_bd_compare(a),
        Command::Sweep(a) => cmd_sweep(a),
    }
}

fn build_grid(params: &FlowParams) -> Result<CollocationGrid> {
    CollocationGrid::build(GridSpec::new(params.n_poly, params.resolve_mapping())?)
}

fn param_metadata(t: &mut Table, params: &FlowParams, forced: bool) {
    t.meta("alpha", params.alpha);
    t.meta("n", params.n);
    t.meta("re", params.re);
    t.meta("N", params.n_poly);
    t.meta("case", case_desc(ModeCase::classify(params.alpha, params.n)));
    t.meta("mapping", mapping_desc(params, forced));
}

fn cmd_spectrum(a: SpectrumArgs) -> Result<i32> {
    let params = a.params.to_params()?;
    let grid = build_grid(&params)?;
    let pencil = assemble(&params, &grid)?;
    let spectrum = solve_qz_with(&pencil, &params.tol)?;

    let keep = a.modes.unwrap_or(spectrum.modes.len()).min(spectrum.modes.len());
    let mut t = Table::new(["re_omega", "im_omega", "residual"]);
    param_metadata(&mut t, &params, !matches!(a.params.stretch, Stretch::Auto));
    t.meta("size", pencil.size);
    t.meta("modes", keep);
    for m in spectrum.modes.iter().take(keep) {
        t.push(vec![m.omega.re, m.omega.im, m.residual]);
    }
    t.emit(a.format.into(), a.out.as_deref())?;

    if let (Some(out), Some(_)) = (&a.out, a.modes) {
        let mut cols = vec!["y".to_string()];
        for i in 0..keep {
            cols.push(format!("re_phi_{i}"));
            cols.push(format!("im_phi_{i}"));
            cols.push(format!("re_om_{i}"));
            cols.push(format!("im_om_{i}"));
        }
        let mut ef = Table::new(cols);
        param_metadata(&mut ef, &params, !matches!(a.params.stretch, Stretch::Auto));
        for j in 0..grid.len() {
            let mut row = vec![grid.y[j]];
            for m in spectrum.modes.iter().take(keep) {
                row.extend([m.phi[j].re, m.phi[j].im, m.omega_var[j].re, m.omega_var[j].im]);
            }
            ef.push(row);
        }
        ef.emit(a.format.into(), Some(&sibling(out, "eigenfunctions")))?;
    }
    Ok(0)
}

fn cmd_validate(a: ValidateArgs) -> Result<i32> {
    let checks = reference::verify_all()?;
    let mut failures = 0usize;
    let mut stdout = std::io::stdout().lock();
    for c in &checks {
        let r = &c.record;
        if !c.pass {
            failures += 1;
        }
        writeln!(
            stdout,
            "[{}] {:<16} alpha={:<5} n={:<3} re={:<6} N={:<4} agreed {:>2}/{} digits  \
             expected {:+.14e}{:+.14e}i  got {:+.14e}{:+.14e}i",
            if c.pass { "PASS" } else { "FAIL" },
            r.source,
            r.alpha,
            r.n,
            r.re,
            r.n_poly,
            c.digits_agreed,
            r.digits,
            r.omega_real,
            r.omega_imag,
            c.computed.re,
            c.computed.im,
        )?;
    }
    writeln!(stdout, "{} of {} rows verified", checks.len() - failures, checks.len())?;

    if let Some(out) = &a.out {
        let mut t = Table::new([
            "alpha",
            "n",
            "re",
            "N",
            "digits_required",
            "digits_agreed",
            "abs_error",
            "pass",
            "re_expected",
            "im_expected",
            "re_computed",
            "im_computed",
        ]);
        t.meta("rows", checks.len());
        t.meta("failures", failures);
        for c in &checks {
            let r = &c.record;
            t.push(vec![
                r.alpha,
                r.n as f64,
                r.re,
                r.n_poly as f64,
                r.digits as f64,
                c.digits_agreed as f64,
                c.error,
                if c.pass { 1.0 } else { 0.0 },
                r.omega_real,
                r.omega_imag,
                c.computed.re,
                c.computed.im,
            ]);
        }
        t.emit(a.format.into(), Some(out))?;
    }
    Ok(if failures == 0 { 0 } else { 1 })
}

fn pattern_table(p: &optimal::PolarPattern, label: &str) -> Table {
    let mut t = Table::new(["r", "theta", "u", "v", "w"]);
    t.meta("field", label);
    for j in 0..p.r.len() {
        for (k, &theta) in p.theta.iter().enumerate() {
            t.push(vec![p.r[j], theta, p.u[(j, k)], p.v[(j, k)], p.w[(j, k)]]);
        }
    }
    t
}

fn cmd_optimal(a: OptimalArgs) -> Result<i32> {
    let grid = CollocationGrid::build(GridSpec::new(a.n_poly, Mapping::Linear)?)?;
    let growth = optimal::optimal_growth(a.n, a.t, &grid)?;

    let mut t = Table::new(["gain"]);
    t.meta("n", a.n);
    t.meta("t", a.t);
    t.meta("N", a.n_poly);
    t.meta("g_max", growth.g_max);
    t.meta("dropped_complex", growth.dropped_complex);
    for &g in &growth.gains {
        t.push(vec![g]);
    }
    t.emit(a.format.into(), a.out.as_deref())?;

    if let Some(out) = &a.out {
        let initial =
            optimal::pattern_fields(&growth.phi0, &growth.omega0, &grid, a.n, a.theta_samples)?;
        let evolved =
            optimal::pattern_fields(&growth.phi_t, &growth.omega_t, &grid, a.n, a.theta_samples)?;
        pattern_table(&initial, "initial")
            .emit(a.format.into(), Some(&sibling(out, "initial")))?;
        pattern_table(&evolved, "evolved")
            .emit(a.format.into(), Some(&sibling(out, "evolved")))?;
    }
    Ok(0)
}

fn cmd_stokes(a: StokesArgs) -> Result<i32> {
    if a.re <= 0.0 {
        return Err(Error::Params(format!("re must be positive; got {}", a.re)));
    }
    let mut t = Table::new(["family", "index", "lambda", "im_omega"]);
    t.meta("re", a.re);
    t.meta("kmax", a.kmax);
    for (fam, kind) in [(1.0, StokesKind::Psi1), (2.0, StokesKind::Psi2)] {
        for (i, &lam) in char_roots(kind, a.kmax)?.iter().enumerate() {
            t.push(vec![fam, i as f64, lam, 4.0 * lam / a.re]);
        }
    }
    t.emit(a.format.into(), a.out.as_deref())?;

    if let Some(out) = &a.out {
        let grid = CollocationGrid::build(GridSpec::new(64, Mapping::Linear)?)?;
        let m1 = modes(StokesKind::Psi1, a.kmax, a.modes, &grid)?;
        let m2 = modes(StokesKind::Psi2, a.kmax, a.modes, &grid)?;

        let mut cols = vec!["y".to_string()];
        for i in 0..m1.len() {
            cols.push(format!("psi1_{i}"));
        }
        for i in 0..m2.len() {
            cols.push(format!("psi2_{i}"));
        }
        let mut ef = Table::new(cols);
        let nodes: Vec<f64> = grid.y.clone();
        let f1: Vec<Vec<f64>> =
            m1.iter().map(|m| eigenfunction(m, &nodes)).collect::<Result<_>>()?;
        let f2: Vec<Vec<f64>> =
            m2.iter().map(|m| eigenfunction(m, &nodes)).collect::<Result<_>>()?;
        for j in 0..nodes.len() {
            let mut row = vec![nodes[j]];
            row.extend(f1.iter().map(|f| f[j]));
            row.extend(f2.iter().map(|f| f[j]));
            ef.push(row);
        }
        ef.emit(a.format.into(), Some(&sibling(out, "eigenfunctions")))?;

        for (label, ms) in [("gram_axial", &m1), ("gram_azimuthal", &m2)] {
            let g = gram_matrix(ms, &grid)?;
            let mut gt = Table::new((0..g.ncols()).map(|i| format!("g{i}")));
            gt.meta("family", label);
            for i in 0..g.nrows() {
                gt.push((0..g.ncols()).map(|j| g[(i, j)]).collect());
            }
            gt.emit(a.format.into(), Some(&sibling(out, label)))?;
        }
    }
    Ok(0)
}

fn auto_region(spectrum: &Spectrum) -> Result<Region> {
    let take = spectrum.modes.len().min(24);
    if take == 0 {
        return Err(Error::Params("empty spectrum; cannot pick a comparison window".into()));
    }
    let omegas: Vec<Complex64> = spectrum.modes.iter().take(take).map(|m| m.omega).collect();
    let (mut re_lo, mut re_hi) = (f64::MAX, f64::MIN);
    let (mut im_lo, mut im_hi) = (f64::MAX, f64::MIN);
    for w in &omegas {
        re_lo = re_lo.min(w.re);
        re_hi = re_hi.max(w.re);
        im_lo = im_lo.min(w.im);
        im_hi = im_hi.max(w.im);
    }
    let pad = |lo: f64, hi: f64| {
        let h = 0.05 * (hi - lo).max(1e-6);
        (lo - h, hi + h)
    };
    Ok(Region { re: pad(re_lo, re_hi), im: pad(im_lo, im_hi) })
}

fn cmd_bd_compare(a: BdCompareArgs) -> Result<i32> {
    let params = a.params.to_params()?;
    let grid = build_grid(&params)?;
    let pencil = assemble(&params, &grid)?;
    let present = solve_qz(&pencil)?;

    let bd_n = a.bd_n.unwrap_or(params.n_poly);
    let bd_params = FlowParams::new(params.alpha, params.n, params.re, bd_n)?;
    let rgrid = radial_grid(bd_n)?;
    let bd_pencil = assemble_bd(&bd_params, &rgrid)?;
    let bd = solve_qz(&bd_pencil)?;

    let given = [a.re_min, a.re_max, a.im_min, a.im_max];
    let region = if given.iter().all(Option::is_some) {
        Region { re: (a.re_min.unwrap(), a.re_max.unwrap()), im: (a.im_min.unwrap(), a.im_max.unwrap()) }
    } else if given.iter().all(Option::is_none) {
        auto_region(&present)?
    } else {
        return Err(Error::Params(
            "give all of --re-min --re-max --im-min --im-max, or none".into(),
        ));
    };

    let report = compare_spectra(&present, &bd, &region)?;
    let mut t = Table::new([
        "re_present",
        "im_present",
        "re_bd",
        "im_bd",
        "deviation",
        "cond_present",
        "cond_bd",
    ]);
    param_metadata(&mut t, &params, !matches!(a.params.stretch, Stretch::Auto));
    t.meta("bd_N", bd_n);
    t.meta("region_re", format!("{}..{}", region.re.0, region.re.1));
    t.meta("region_im", format!("{}..{}", region.im.0, region.im.1));
    t.meta("matched", report.present_count);
    t.meta("bd_in_region", report.reference_count);
    t.meta("max_deviation", crate::output::fmt_g17(report.max_deviation));
    t.meta("conditions_computed", a.conditions.min(report.pairs.len()));
    for (i, pair) in report.pairs.iter().enumerate() {
        let (cp, cb) = if i < a.conditions {
            (
                condition_diagnostic(&pencil, pair.present)?,
                condition_diagnostic(&bd_pencil, pair.reference)?,
            )
        } else {
            (-1.0, -1.0)
        };
        t.push(vec![
            pair.present.re,
            pair.present.im,
            pair.reference.re,
            pair.reference.im,
            pair.deviation,
            cp,
            cb,
        ]);
    }
    t.emit(a.format.into(), a.out.as_deref())?;
    Ok(0)
}

/// One completed sweep tuple, serialized as a single JSON line.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRecord {
    pub alpha: f64,
    pub n: i32,
    pub re: f64,
    #[serde(rename = "N")]
    pub n_poly: usize,
    pub mapping: String,
    pub size: usize,
    pub re_omega: f64,
    pub im_omega: f64,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct SweepPlan {
    pub alphas: Vec<f64>,
    pub ns: Vec<i32>,
    pub res: Vec<f64>,
    pub n_poly: usize,
    pub stretch: Stretch,
}

impl SweepPlan {
    /// Cartesian product in file order: alpha outermost, re innermost.
    pub fn tuples(&self) -> Vec<(f64, i32, f64)> {
        let mut out = Vec::with_capacity(self.alphas.len() * self.ns.len() * self.res.len());
        for &alpha in &self.alphas {
            for &n in &self.ns {
                for &re in &self.res {
                    out.push((alpha, n, re));
                }
            }
        }
        out
    }
}

/// Parse `key = v1, v2, ...` lines; `#` starts a comment.  Keys: alpha, n,
/// re (lists), N (single), stretch (optional).
pub fn parse_sweep_config(text: &str) -> Result<SweepPlan> {
    let mut alphas = None;
    let mut ns = None;
    let mut res = None;
    let mut n_poly = None;
    let mut stretch = Stretch::Auto;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Params(format!("config line {}: missing '='", lineno + 1)))?;
        let values: Vec<&str> = value.split(',').map(str::trim).collect();
        let floats = |vs: &[&str]| -> Result<Vec<f64>> {
            vs.iter()
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| Error::Params(format!("config: bad number {v:?}")))
                })
                .collect()
        };
        match key.trim() {
            "alpha" => alphas = Some(floats(&values)?),
            "re" => res = Some(floats(&values)?),
            "n" => {
                ns = Some(
                    values
                        .iter()
                        .map(|v| {
                            v.parse::<i32>()
                                .map_err(|_| Error::Params(format!("config: bad integer {v:?}")))
                        })
                        .collect::<Result<Vec<i32>>>()?,
                )
            }
            "N" => {
                let v = floats(&values)?;
                if v.len() != 1 || v[0] < 1.0 || v[0].fract() != 0.0 {
                    return Err(Error::Params("config: N takes one positive integer".into()));
                }
                n_poly = Some(v[0] as usize);
            }
            "stretch" => {
                stretch = parse_stretch(values.first().copied().unwrap_or(""))
                    .map_err(Error::Params)?
            }
            other => return Err(Error::Params(format!("config: unknown key {other:?}"))),
        }
    }
    let need = |x: Option<Vec<f64>>, k: &str| {
        x.filter(|v| !v.is_empty())
            .ok_or_else(|| Error::Params(format!("config: key {k:?} is required")))
    };
    Ok(SweepPlan {
        alphas: need(alphas, "alpha")?,
        ns: ns
            .filter(|v| !v.is_empty())
            .ok_or_else(|| Error::Params("config: key \"n\" is required".into()))?,
        res: need(res, "re")?,
        n_poly: n_poly.ok_or_else(|| Error::Params("config: key \"N\" is required".into()))?,
        stretch,
    })
}

fn sweep_solve(alpha: f64, n: i32, re: f64, n_poly: usize, stretch: Stretch) -> Result<SweepRecord> {
    let mut params = FlowParams::new(alpha, n, re, n_poly)?;
    if let Stretch::Fixed(m) = stretch {
        params = params.with_mapping(m);
    }
    let grid = build_grid(&params)?;
    let pencil = assemble(&params, &grid)?;
    let spectrum = solve_qz(&pencil)?;
    let lead = spectrum
        .modes
        .first()
        .ok_or_else(|| Error::Eig("empty spectrum in sweep tuple".into()))?;
    Ok(SweepRecord {
        alpha,
        n,
        re,
        n_poly,
        mapping: mapping_desc(&params, matches!(stretch, Stretch::Fixed(_))),
        size: pencil.size,
        re_omega: lead.omega.re,
        im_omega: lead.omega.im,
        residual: lead.residual,
    })
}

fn load_existing_records(path: &Path) -> Result<Vec<SweepRecord>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = std::fs::read_to_string(path)?;
    // A torn final line from an interrupted run parses as garbage; drop it
    // and recompute that tuple.
    Ok(text.lines().filter_map(|l| serde_json::from_str::<SweepRecord>(l).ok()).collect())
}

fn cmd_sweep(a: SweepArgs) -> Result<i32> {
    let plan = parse_sweep_config(&std::fs::read_to_string(&a.config)?)?;
    let tuples = plan.tuples();
    let existing = load_existing_records(&a.out)?;
    let key = |alpha: f64, n: i32, re: f64| (alpha.to_bits(), n, re.to_bits());
    let done: BTreeMap<_, &SweepRecord> =
        existing.iter().map(|r| (key(r.alpha, r.n, r.re), r)).collect();

    let pending: Vec<(usize, (f64, i32, f64))> = tuples
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, (al, n, re))| !done.contains_key(&key(*al, *n, *re)))
        .collect();

    let jobs = a
        .jobs
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1).min(4)
        })
        .max(1)
        .min(pending.len().max(1));

    let mut computed: BTreeMap<usize, SweepRecord> = BTreeMap::new();
    if !pending.is_empty() {
        let cursor = AtomicUsize::new(0);
        let (tx, rx) = mpsc::channel::<(usize, Result<SweepRecord>)>();
        std::thread::scope(|scope| {
            for _ in 0..jobs {
                let tx = tx.clone();
                let cursor = &cursor;
                let pending = &pending;
                let plan = &plan;
                scope.spawn(move || loop {
                    let i = cursor.fetch_add(1, Ordering::Relaxed);
                    let Some(&(idx, (alpha, n, re))) = pending.get(i) else { break };
                    let rec = sweep_solve(alpha, n, re, plan.n_poly, plan.stretch);
                    if tx.send((idx, rec)).is_err() {
                        break;
                    }
                });
            }
        });
        drop(tx);
        let mut first_err = None;
        for (idx, rec) in rx {
            match rec {
                Ok(r) => {
                    computed.insert(idx, r);
                }
                Err(e) => first_err = first_err.or(Some(e)),
            }
        }
        if let Some(e) = first_err {
            return Err(e);
        }
    }

    // Rewrite the file in tuple order so any run — fresh, resumed, or
    // partially pre-seeded — leaves byte-identical contents.
    let mut text = String::new();
    for (idx, (alpha, n, re)) in tuples.iter().copied().enumerate() {
        let record = done
            .get(&key(alpha, n, re))
            .copied()
            .or_else(|| computed.get(&idx))
            .expect("every tuple is either reused or computed");
        text.push_str(&serde_json::to_string(record).map_err(|e| Error::Encode(e.to_string()))?);
        text.push('\n');
    }
    write_text(Some(&a.out), &text)?;
    println!(
        "{} tuples ({} reused, {} computed) -> {}",
        tuples.len(),
        tuples.len() - computed.len(),
        computed.len(),
        a.out.display()
    );
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stretch_parser_accepts_the_three_shapes() {
        assert!(matches!(parse_stretch("auto"), Ok(Stretch::Auto)));
        assert!(matches!(parse_stretch("linear"), Ok(Stretch::Fixed(Mapping::Linear))));
        match parse_stretch("2.5") {
            Ok(Stretch::Fixed(Mapping::Stretched { a })) => assert_eq!(a, 2.5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_stretch("0.5").is_err());
        assert!(parse_stretch("wide").is_err());
    }

    #[test]
    fn mapping_echo_reflects_the_auto_rule() {
        let p = FlowParams::new(20.0, 20, 4000.0, 24).unwrap();
        assert_eq!(mapping_desc(&p, false), "stretched a=3 (auto)");
        let p = FlowParams::new(1.0, 0, 3000.0, 24).unwrap();
        assert_eq!(mapping_desc(&p, false), "linear (auto)");
        let p = p.with_mapping(Mapping::Stretched { a: 2.0 });
        assert_eq!(mapping_desc(&p, true), "stretched a=2 (forced)");
    }

    #[test]
    fn sweep_config_parses_lists_and_rejects_unknown_keys() {
        let plan = parse_sweep_config(
            "# comment\nalpha = 1\nn = 0, 1, 2, 3\nre = 3000\nN = 47\n",
        )
        .unwrap();
        assert_eq!(plan.alphas, vec![1.0]);
        assert_eq!(plan.ns, vec![0, 1, 2, 3]);
        assert_eq!(plan.res, vec![3000.0]);
        assert_eq!(plan.n_poly, 47);
        assert_eq!(plan.tuples().len(), 4);
        assert!(parse_sweep_config("alpha = 1\nn = 0\nre = 10\nN = 20\nwat = 1\n").is_err());
        assert!(parse_sweep_config("alpha = 1\nre = 10\nN = 20\n").is_err());
        assert!(parse_sweep_config("alpha = 1\nn = 0\nre = 10\nN = 20.5\n").is_err());
    }

    #[test]
    fn sweep_tuples_run_alpha_outermost() {
        let plan = SweepPlan {
            alphas: vec![1.0, 2.0],
            ns: vec![0, 1],
            res: vec![10.0],
            n_poly: 16,
            stretch: Stretch::Auto,
        };
        assert_eq!(
            plan.tuples(),
            vec![(1.0, 0, 10.0), (1.0, 1, 10.0), (2.0, 0, 10.0), (2.0, 1, 10.0)]
        );
    }

    #[test]
    fn sweep_records_serialize_with_stable_keys() {
        let r = SweepRecord {
            alpha: 1.0,
            n: 0,
            re: 3000.0,
            n_poly: 47,
            mapping: "linear (auto)".into(),
            size: 93,
            re_omega: 0.9,
            im_omega: -0.05,
            residual: 1e-13,
        };
        let line = serde_json::to_string(&r).unwrap();
        assert!(line.starts_with("{\"alpha\":"));
        assert!(line.contains("\"N\":47"));
        let back: SweepRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(back.size, 93);
    }

    #[test]
    fn torn_result_lines_are_dropped_on_load() {
        let dir = std::env::temp_dir().join(format!("pipestab-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("torn.jsonl");
        std::fs::write(
            &path,
            "{\"alpha\":1.0,\"n\":0,\"re\":10.0,\"N\":16,\"mapping\":\"linear (auto)\",\
             \"size\":31,\"re_omega\":0.1,\"im_omega\":-0.2,\"residual\":1e-10}\n{\"alpha\":2",
        )
        .unwrap();
        let recs = load_existing_records(&path).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].n_poly, 16);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
