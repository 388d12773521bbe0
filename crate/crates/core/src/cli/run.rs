//! Sweep drivers behind the CLI subcommands.
//!
//! Every command reduces to evaluating a list of parameter points (in
//! parallel, grid order preserved) and serializing one row per point.
//! A point evaluation derives the squeezed frame, picks a starting cutoff,
//! grows it until the phonon occupation stabilizes, extracts the
//! correlation/squeezing observables from the converged eigenstates, and
//! attaches the analytic closed-form columns so numerical and asymptotic
//! curves land in the same table.

use super::config::Config;
use super::output::{Cell, Table};
use crate::analytic::{
    g2_np_analytic, g2_sp_analytic, np_excitation_energy, sp_excitation_energy, sp_solution,
};
use crate::error::Error;
use crate::hilbert::{parity_operator, HilbertSpace};
use crate::model::{
    build_h_effective, build_h_linearized, build_h_squeezed_displaced, critical_coupling,
    derive_squeezed_frame, frame_from_x, CriticalCoupling, ModelParams, SqueezedFrame, XiSpec,
};
use crate::observables::{
    classify_phase, g2_numeric, quadrature_moments, symmetry_broken_pair, ModeView, MomentRow,
    PhaseLabel, QuadratureFrame,
};
use crate::spectra::{
    converge_truncation, detect_degeneracy, diagonalize_in_space, ConvergenceOptions,
    SolveOptions, SpectrumResult,
};
use crate::Result;
use rayon::prelude::*;

/// Outcome of a command: how many grid points finished unconverged or in
/// error (drives the process exit code).
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOutcome {
    pub rows: usize,
    pub unconverged: usize,
}

/// When to conjugate superradiant points by the mean-field displacement
/// before diagonalizing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredisplaceMode {
    Auto,
    On,
    Off,
}

/// Numerical knobs shared by all commands.
#[derive(Debug, Clone)]
pub struct Numerics {
    pub tol: f64,
    pub cutoff_max: usize,
    pub k_states: usize,
    pub dense_threshold: usize,
    pub rtol: f64,
    pub occupation_floor: f64,
    pub predisplace: PredisplaceMode,
    pub predisplace_min_beta_sq: f64,
    pub degeneracy_rel_tol: f64,
    pub workers: usize,
}

impl Numerics {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let predisplace = match cfg.get_str("numerics.predisplace")? {
            "auto" => PredisplaceMode::Auto,
            "on" | "true" => PredisplaceMode::On,
            "off" | "false" => PredisplaceMode::Off,
            other => {
                return Err(Error::Config(format!(
                    "numerics.predisplace must be auto|on|off, got '{other}'"
                )))
            }
        };
        Ok(Self {
            tol: cfg.get_f64("numerics.tol")?,
            cutoff_max: cfg.get_usize("numerics.cutoff_max")?,
            k_states: cfg.get_usize("numerics.k_states")?.max(2),
            dense_threshold: cfg.get_usize("numerics.dense_threshold")?,
            rtol: cfg.get_f64("numerics.rtol")?,
            occupation_floor: cfg.get_f64("numerics.occupation_floor")?,
            predisplace,
            predisplace_min_beta_sq: cfg.get_f64("numerics.predisplace_min_beta_sq")?,
            degeneracy_rel_tol: cfg.get_f64("numerics.degeneracy_rel_tol")?,
            workers: cfg.get_usize("numerics.workers")?,
        })
    }

    fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            dense_threshold: self.dense_threshold,
            rtol: self.rtol,
            ..SolveOptions::default()
        }
    }

    /// Fill the `numerics.*` defaults shared by every command.
    pub fn install_defaults(cfg: &mut Config) {
        cfg.default_key("numerics.tol", "1e-6");
        cfg.default_key("numerics.cutoff_max", "16384");
        cfg.default_key("numerics.k_states", "4");
        cfg.default_key("numerics.dense_threshold", "4096");
        cfg.default_key("numerics.rtol", "1e-9");
        cfg.default_key("numerics.occupation_floor", "1e-6");
        cfg.default_key("numerics.predisplace", "auto");
        cfg.default_key("numerics.predisplace_min_beta_sq", "150");
        cfg.default_key("numerics.degeneracy_rel_tol", "1e-3");
        let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
        cfg.default_key("numerics.workers", workers.to_string());
    }
}

/// How the coupling coordinate of a point is specified.
#[derive(Debug, Clone, Copy)]
pub enum CouplingCoord {
    /// Lab-frame rescaled coupling `g̃_c = g/g_c`.
    GtildeC(f64),
    /// Squeezed-frame coupling `x = g̃_c^s` (the transition sits at 1).
    X(f64),
}

/// Which frequency the qubit ratio is anchored to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmegaAnchor {
    /// `Omega = ratio * omega_s` (scale-invariant sweeps).
    OmegaS,
    /// `Omega = ratio * omega_b` (fixed physical qubit frequency).
    OmegaB,
}

impl OmegaAnchor {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "omega_s" => Ok(OmegaAnchor::OmegaS),
            "omega_b" => Ok(OmegaAnchor::OmegaB),
            other => Err(Error::Config(format!(
                "omega_anchor must be omega_s|omega_b, got '{other}'"
            ))),
        }
    }
}

/// One parameter point to evaluate.
#[derive(Debug, Clone)]
pub struct PointSpec {
    pub omega_b: f64,
    pub alpha: f64,
    pub xi_ratio: f64,
    pub coupling: CouplingCoord,
    pub omega_ratio: f64,
    pub anchor: OmegaAnchor,
    pub orders: Vec<usize>,
    pub frame: QuadratureFrame,
}

/// Everything a result row can carry. Fields that do not apply to a given
/// point are NaN.
#[derive(Debug, Clone)]
pub struct PointRow {
    pub status: String,
    pub alpha: f64,
    pub xi_ratio: f64,
    pub gtc: f64,
    pub x: f64,
    pub ratio_s: f64,
    pub ratio_b: f64,
    pub r: f64,
    pub omega_s: f64,
    pub n_mean: f64,
    pub g2_numeric: f64,
    pub g2_oracle: f64,
    pub g2_printed: f64,
    pub coherence_abs: f64,
    pub beta_g: f64,
    pub coherence_lab: f64,
    pub gap: f64,
    pub gap_analytic: f64,
    pub degeneracy: i64,
    pub parity: f64,
    pub phase: String,
    pub converged: bool,
    pub cutoff: i64,
    pub dim: i64,
    pub solver: String,
    pub residual: f64,
    pub predisplaced: bool,
    pub moments: Vec<MomentRow>,
    pub gtc_critical: f64,
}

impl PointRow {
    fn blank(spec: &PointSpec, status: String) -> Self {
        let (gtc, x) = match spec.coupling {
            CouplingCoord::GtildeC(g) => (g, f64::NAN),
            CouplingCoord::X(x) => (f64::NAN, x),
        };
        Self {
            status,
            alpha: spec.alpha,
            xi_ratio: spec.xi_ratio,
            gtc,
            x,
            ratio_s: f64::NAN,
            ratio_b: f64::NAN,
            r: f64::NAN,
            omega_s: f64::NAN,
            n_mean: f64::NAN,
            g2_numeric: f64::NAN,
            g2_oracle: f64::NAN,
            g2_printed: f64::NAN,
            coherence_abs: f64::NAN,
            beta_g: f64::NAN,
            coherence_lab: f64::NAN,
            gap: f64::NAN,
            gap_analytic: f64::NAN,
            degeneracy: 0,
            parity: f64::NAN,
            phase: PhaseLabel::Undefined.as_str().to_string(),
            converged: false,
            cutoff: 0,
            dim: 0,
            solver: String::new(),
            residual: f64::NAN,
            predisplaced: false,
            moments: Vec::new(),
            gtc_critical: f64::NAN,
        }
    }
}

/// Resolve the squeezed frame of a point (also fixing the qubit frequency
/// from the configured anchor).
pub fn resolve_frame(spec: &PointSpec) -> Result<SqueezedFrame> {
    let squeeze_arg = match spec.coupling {
        CouplingCoord::GtildeC(gtc) => {
            1.0 + spec.alpha * gtc * gtc - 4.0 * spec.xi_ratio
        }
        CouplingCoord::X(x) => {
            (1.0 - 4.0 * spec.xi_ratio) / (1.0 - spec.alpha * x * x)
        }
    };
    if !(squeeze_arg > 0.0) || !squeeze_arg.is_finite() {
        return Err(Error::MechanicalInstability { argument: squeeze_arg });
    }
    let big_omega = match spec.anchor {
        OmegaAnchor::OmegaB => spec.omega_ratio * spec.omega_b,
        OmegaAnchor::OmegaS => spec.omega_ratio * spec.omega_b * squeeze_arg.sqrt(),
    };
    match spec.coupling {
        CouplingCoord::GtildeC(gtc) => {
            let g_c = (spec.omega_b * big_omega).sqrt() / 2.0;
            let params = ModelParams::new(
                spec.omega_b,
                big_omega,
                spec.alpha,
                gtc * g_c,
                XiSpec::Direct { xi: spec.xi_ratio * spec.omega_b },
            )?;
            derive_squeezed_frame(&params)
        }
        CouplingCoord::X(x) => frame_from_x(spec.omega_b, big_omega, spec.alpha, spec.xi_ratio, x),
    }
}

/// Starting Fock cutoff: enough room for critical fluctuations at the
/// given frequency ratio, plus the coherent occupation when the point is
/// diagonalized without pre-displacement.
fn initial_cutoff(ratio_s: f64, beta_sq: f64) -> usize {
    let critical = 32.0 + 8.0 * ratio_s.abs().powf(1.0 / 3.0);
    let coherent = if beta_sq > 0.0 { beta_sq + 8.0 * beta_sq.sqrt() + 32.0 } else { 0.0 };
    (critical + coherent).ceil() as usize
}

/// Evaluate one parameter point into a result row.
pub fn evaluate_point(spec: &PointSpec, numerics: &Numerics) -> Result<PointRow> {
    let frame = resolve_frame(spec)?;
    let x = frame.gtilde_c_s;
    let mut row = PointRow::blank(spec, "ok".into());
    row.gtc = frame.gtilde_c;
    row.x = x;
    row.ratio_s = frame.big_omega / frame.omega_s;
    row.ratio_b = frame.big_omega / spec.omega_b;
    row.r = frame.r;
    row.omega_s = frame.omega_s;

    // Analytic reference columns.
    if x < 1.0 {
        row.gap_analytic = np_excitation_energy(x, frame.omega_s);
        if x > 0.0 {
            if let Ok(g) = g2_np_analytic(x) {
                row.g2_oracle = g.oracle;
                row.g2_printed = g.printed;
            }
        }
    } else if x > 1.0 {
        row.gap_analytic = sp_excitation_energy(x, frame.omega_s);
        let sp = sp_solution(x, frame.omega_s, frame.big_omega, frame.r)?;
        row.beta_g = sp.beta_g;
        row.coherence_lab = sp.coherence_lab;
        if let Ok(g) = g2_sp_analytic(x, frame.omega_s, frame.big_omega, frame.r) {
            row.g2_oracle = g.oracle;
            row.g2_printed = g.printed;
        }
    } else {
        row.gap_analytic = 0.0;
    }

    let beta_sq = if x > 1.0 {
        frame.big_omega / (4.0 * frame.omega_s) * (x * x - x.powi(-2))
    } else {
        0.0
    };
    let displacement = match numerics.predisplace {
        PredisplaceMode::On => beta_sq.sqrt(),
        PredisplaceMode::Off => 0.0,
        PredisplaceMode::Auto => {
            if beta_sq > numerics.predisplace_min_beta_sq {
                beta_sq.sqrt()
            } else {
                0.0
            }
        }
    };
    row.predisplaced = displacement != 0.0;

    let start = initial_cutoff(row.ratio_s, if row.predisplaced { 0.0 } else { beta_sq });
    if start > numerics.cutoff_max {
        return Err(Error::Config(format!(
            "required starting cutoff {start} exceeds numerics.cutoff_max ({}); \
             enable pre-displacement or raise the ceiling",
            numerics.cutoff_max
        )));
    }

    let conv_opts = ConvergenceOptions {
        tol: numerics.tol,
        growth: 1.5,
        ceiling: numerics.cutoff_max,
        k: numerics.k_states,
        solve: numerics.solve_options(),
    };
    let frame_copy = frame;
    let disp = displacement;
    let report = converge_truncation(
        move |cutoffs| {
            let space = HilbertSpace::qubit_boson(cutoffs[0])?;
            let h = build_h_squeezed_displaced(&frame_copy, &space, disp)?;
            let symmetry = if disp == 0.0 { Some(parity_operator(&space)?) } else { None };
            Ok((h, space, symmetry))
        },
        move |spectrum, space| {
            let view = ModeView::displaced(0, disp);
            let rep = g2_numeric(spectrum.ground_state(), space, view, f64::MIN_POSITIVE)?;
            Ok(rep.n_mean)
        },
        &[start],
        &conv_opts,
    )?;
    let spectrum = &report.spectrum;
    let space = HilbertSpace::qubit_boson(spectrum.truncation_dims[0])?;
    let view = ModeView::displaced(0, displacement);

    row.converged = spectrum.converged;
    row.cutoff = spectrum.truncation_dims[0] as i64;
    row.dim = space.total_dim() as i64;
    row.solver = spectrum.solver_path.as_str().to_string();
    row.residual = spectrum.max_residual;
    row.gap = spectrum.gap;
    row.degeneracy = detect_degeneracy(spectrum, numerics.degeneracy_rel_tol, frame.omega_s) as i64;

    // Pick the state used for the correlation observables: the
    // symmetry-broken combination when a parity doublet is present, the
    // (possibly displaced-branch) ground state otherwise.
    let mut correlation = g2_numeric(spectrum.ground_state(), &space, view, numerics.occupation_floor)?;
    if !row.predisplaced && row.degeneracy >= 2 {
        let pair = symmetry_broken_pair(
            &spectrum.eigenvectors[0],
            &spectrum.eigenvectors[1],
            &space,
            view,
        )?;
        correlation = g2_numeric(&pair.plus, &space, view, numerics.occupation_floor)?;
    }
    correlation.phase_label = classify_phase(x, &correlation);
    row.n_mean = correlation.n_mean;
    row.g2_numeric = correlation.g2.unwrap_or(f64::NAN);
    row.coherence_abs = correlation.coherence.norm();
    row.parity = expect_ground_parity(spectrum, &space)?;
    row.phase = correlation.phase_label.as_str().to_string();

    if !spec.orders.is_empty() {
        // Moments are taken on the actual ground eigenstate (or the
        // displaced branch, whose fluctuation statistics agree to
        // exponential accuracy deep in the symmetry-broken phase).
        let m = quadrature_moments(
            spectrum.ground_state(),
            &space,
            view,
            &spec.orders,
            spec.frame,
            frame.r,
        )?;
        row.moments = m.rows;
    }
    if !spectrum.converged {
        row.status = "unconverged".into();
    }
    Ok(row)
}

fn expect_ground_parity(spectrum: &SpectrumResult, space: &HilbertSpace) -> Result<f64> {
    let p = parity_operator(space)?;
    Ok(crate::observables::expectation(spectrum.ground_state(), &p)?.re)
}

fn point_columns(orders: &[usize], with_boundary: bool) -> Vec<String> {
    let mut cols: Vec<String> = [
        "status",
        "alpha",
        "xi_ratio",
        "gtc",
        "x",
        "omega_over_omega_s",
        "omega_over_omega_b",
        "r",
        "omega_s",
        "n_mean",
        "g2_numeric",
        "g2_oracle",
        "g2_printed",
        "coherence_abs",
        "beta_g",
        "coherence_lab_analytic",
        "gap",
        "gap_analytic",
        "degeneracy",
        "parity",
        "phase",
        "converged",
        "cutoff",
        "dim",
        "solver",
        "residual",
        "predisplaced",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    if with_boundary {
        cols.push("gtc_critical".to_string());
    }
    for &n in orders {
        cols.push(format!("m{n}"));
        cols.push(format!("thr{n}"));
        cols.push(format!("squeezed{n}"));
        cols.push(format!("bch_dev{n}"));
    }
    cols
}

fn point_cells(row: &PointRow, orders: &[usize], with_boundary: bool) -> Vec<Cell> {
    let mut cells = vec![
        Cell::S(row.status.clone()),
        Cell::F(row.alpha),
        Cell::F(row.xi_ratio),
        Cell::F(row.gtc),
        Cell::F(row.x),
        Cell::F(row.ratio_s),
        Cell::F(row.ratio_b),
        Cell::F(row.r),
        Cell::F(row.omega_s),
        Cell::F(row.n_mean),
        Cell::F(row.g2_numeric),
        Cell::F(row.g2_oracle),
        Cell::F(row.g2_printed),
        Cell::F(row.coherence_abs),
        Cell::F(row.beta_g),
        Cell::F(row.coherence_lab),
        Cell::F(row.gap),
        Cell::F(row.gap_analytic),
        Cell::I(row.degeneracy),
        Cell::F(row.parity),
        Cell::S(row.phase.clone()),
        Cell::B(row.converged),
        Cell::I(row.cutoff),
        Cell::I(row.dim),
        Cell::S(row.solver.clone()),
        Cell::F(row.residual),
        Cell::B(row.predisplaced),
    ];
    if with_boundary {
        cells.push(Cell::F(row.gtc_critical));
    }
    for (i, _) in orders.iter().enumerate() {
        match row.moments.get(i) {
            Some(m) => {
                cells.push(Cell::F(m.moment));
                cells.push(Cell::F(m.threshold));
                cells.push(Cell::B(m.squeezed));
                cells.push(Cell::F(m.bch_deviation.unwrap_or(f64::NAN)));
            }
            None => {
                cells.push(Cell::F(f64::NAN));
                cells.push(Cell::F(f64::NAN));
                cells.push(Cell::B(false));
                cells.push(Cell::F(f64::NAN));
            }
        }
    }
    cells
}

/// Evaluate points in parallel, preserving grid order. Failures become
/// in-row statuses instead of aborting the run.
fn evaluate_grid(specs: &[PointSpec], numerics: &Numerics) -> Vec<PointRow> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(numerics.workers.max(1))
        .build()
        .expect("thread pool");
    pool.install(|| {
        specs
            .par_iter()
            .map(|spec| match evaluate_point(spec, numerics) {
                Ok(row) => row,
                Err(e) => PointRow::blank(spec, format!("error: {e}")),
            })
            .collect()
    })
}

fn parse_orders(cfg: &Config) -> Result<Vec<usize>> {
    let raw = cfg.get_str("orders")?;
    if raw.trim().is_empty() {
        return Ok(Vec::new());
    }
    let orders = cfg.get_usize_list("orders")?;
    for &n in &orders {
        if n < 2 || n % 2 != 0 {
            return Err(Error::Config(format!("orders must be even and >= 2, got {n}")));
        }
    }
    Ok(orders)
}

fn parse_frame(cfg: &Config) -> Result<QuadratureFrame> {
    match cfg.get_str("frame")? {
        "squeezed" => Ok(QuadratureFrame::Squeezed),
        "lab" => Ok(QuadratureFrame::Lab),
        other => Err(Error::Config(format!("frame must be squeezed|lab, got '{other}'"))),
    }
}

fn base_point_spec(cfg: &Config) -> Result<PointSpec> {
    let coupling = if cfg.contains("x") {
        CouplingCoord::X(cfg.get_f64("x")?)
    } else {
        CouplingCoord::GtildeC(cfg.get_f64("gtc")?)
    };
    Ok(PointSpec {
        omega_b: cfg.get_f64("omega_b")?,
        alpha: cfg.get_f64("alpha")?,
        xi_ratio: cfg.get_f64("xi_ratio")?,
        coupling,
        omega_ratio: cfg.get_f64("omega_ratio")?,
        anchor: OmegaAnchor::parse(cfg.get_str("omega_anchor")?)?,
        orders: parse_orders(cfg)?,
        frame: parse_frame(cfg)?,
    })
}

/// `point`: evaluate a single parameter point.
pub fn run_point(cfg: &mut Config) -> Result<(Table, RunOutcome)> {
    cfg.default_key("omega_b", "1");
    cfg.default_key("alpha", "0");
    cfg.default_key("xi_ratio", "0");
    cfg.default_key("gtc", "1");
    cfg.default_key("omega_ratio", "1e3");
    cfg.default_key("omega_anchor", "omega_s");
    cfg.default_key("orders", "2,4,6,8");
    cfg.default_key("frame", "squeezed");
    Numerics::install_defaults(cfg);

    let numerics = Numerics::from_config(cfg)?;
    let spec = base_point_spec(cfg)?;
    let row = evaluate_point(&spec, &numerics)?; // hard error at point level
    let mut table = Table::new("point", &point_columns(&spec.orders, false).iter().map(|s| s.as_str()).collect::<Vec<_>>());
    let unconverged = usize::from(!row.converged);
    table.push_row(point_cells(&row, &spec.orders, false));
    Ok((table, RunOutcome { rows: 1, unconverged }))
}

fn linspace(min: f64, max: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![min];
    }
    (0..count)
        .map(|i| min + (max - min) * i as f64 / (count - 1) as f64)
        .collect()
}

/// `sweep`: one-dimensional scan over `gtc`, `x` or `xi_ratio`.
pub fn run_sweep(cfg: &mut Config) -> Result<(Table, RunOutcome)> {
    cfg.default_key("omega_b", "1");
    cfg.default_key("alpha", "0");
    cfg.default_key("xi_ratio", "0");
    cfg.default_key("omega_ratio", "1e3");
    cfg.default_key("omega_anchor", "omega_s");
    cfg.default_key("orders", "");
    cfg.default_key("frame", "squeezed");
    cfg.default_key("sweep.variable", "gtc");
    cfg.default_key("sweep.min", "0.5");
    cfg.default_key("sweep.max", "1.5");
    cfg.default_key("sweep.count", "21");
    Numerics::install_defaults(cfg);

    let numerics = Numerics::from_config(cfg)?;
    let variable = cfg.get_str("sweep.variable")?.to_string();
    let min = cfg.get_f64("sweep.min")?;
    let max = cfg.get_f64("sweep.max")?;
    let count = cfg.get_usize("sweep.count")?;
    if count < 2 {
        return Err(Error::Config("sweep.count must be >= 2".into()));
    }
    if !(min < max) {
        return Err(Error::Config("sweep.min must be below sweep.max".into()));
    }
    if !(numerics.tol > 0.0) {
        return Err(Error::Config("numerics.tol must be positive".into()));
    }

    if !cfg.contains("gtc") && !cfg.contains("x") && variable != "gtc" && variable != "x" {
        cfg.default_key("gtc", "1");
    }
    let orders = parse_orders(cfg)?;
    let frame = parse_frame(cfg)?;
    let grid = linspace(min, max, count);
    let mut specs = Vec::with_capacity(grid.len());
    for &v in &grid {
        let mut point = Config::new();
        for (k, val) in cfg.iter() {
            point.set(k, val.clone());
        }
        match variable.as_str() {
            "gtc" => point.set("gtc", format!("{v:.17e}")),
            "x" => {
                point.set("x", format!("{v:.17e}"));
            }
            "xi_ratio" => point.set("xi_ratio", format!("{v:.17e}")),
            other => {
                return Err(Error::Config(format!(
                    "sweep.variable must be gtc|x|xi_ratio, got '{other}'"
                )))
            }
        }
        let mut spec = base_point_spec(&point)?;
        spec.orders = orders.clone();
        spec.frame = frame;
        specs.push(spec);
    }

    let rows = evaluate_grid(&specs, &numerics);
    let cols = point_columns(&orders, false);
    let mut table = Table::new("sweep", &cols.iter().map(|s| s.as_str()).collect::<Vec<_>>());
    let mut unconverged = 0;
    for row in &rows {
        if row.status != "ok" {
            unconverged += 1;
        }
        table.push_row(point_cells(row, &orders, false));
    }
    Ok((table, RunOutcome { rows: rows.len(), unconverged }))
}

/// `phase-diagram`: 2-D grid over `xi_ratio` (with the alpha rule) and the
/// squeezed-frame coupling `x`, plus the analytic boundary column.
pub fn run_phase_diagram(cfg: &mut Config) -> Result<(Table, RunOutcome)> {
    cfg.default_key("omega_b", "1");
    cfg.default_key("omega_ratio", "400");
    cfg.default_key("omega_anchor", "omega_s");
    cfg.default_key("orders", "");
    cfg.default_key("frame", "squeezed");
    cfg.default_key("phase.xi_min", "0.0");
    cfg.default_key("phase.xi_max", "0.5");
    cfg.default_key("phase.xi_count", "17");
    cfg.default_key("phase.x_min", "0.2");
    cfg.default_key("phase.x_max", "2.0");
    cfg.default_key("phase.x_count", "16");
    cfg.default_key("phase.alpha_below", "0");
    cfg.default_key("phase.alpha_above", "1.5");
    Numerics::install_defaults(cfg);

    let numerics = Numerics::from_config(cfg)?;
    let xi_grid = linspace(
        cfg.get_f64("phase.xi_min")?,
        cfg.get_f64("phase.xi_max")?,
        cfg.get_usize("phase.xi_count")?,
    );
    let x_grid = linspace(
        cfg.get_f64("phase.x_min")?,
        cfg.get_f64("phase.x_max")?,
        cfg.get_usize("phase.x_count")?,
    );
    let alpha_below = cfg.get_f64("phase.alpha_below")?;
    let alpha_above = cfg.get_f64("phase.alpha_above")?;
    let omega_b = cfg.get_f64("omega_b")?;
    let omega_ratio = cfg.get_f64("omega_ratio")?;
    let anchor = OmegaAnchor::parse(cfg.get_str("omega_anchor")?)?;
    let orders = parse_orders(cfg)?;
    let frame = parse_frame(cfg)?;

    let mut specs = Vec::new();
    let mut boundaries = Vec::new();
    for &xi in &xi_grid {
        let alpha = if xi < 0.25 { alpha_below } else { alpha_above };
        let boundary = match critical_coupling(alpha, xi) {
            CriticalCoupling::Transition(g) => g,
            CriticalCoupling::NoTransition(_) => f64::NAN,
        };
        for &x in &x_grid {
            specs.push(PointSpec {
                omega_b,
                alpha,
                xi_ratio: xi,
                coupling: CouplingCoord::X(x),
                omega_ratio,
                anchor,
                orders: orders.clone(),
                frame,
            });
            boundaries.push(boundary);
        }
    }

    let rows = evaluate_grid(&specs, &numerics);
    let cols = point_columns(&orders, true);
    let mut table = Table::new("phase-diagram", &cols.iter().map(|s| s.as_str()).collect::<Vec<_>>());
    let mut unconverged = 0;
    for (mut row, boundary) in rows.into_iter().zip(boundaries) {
        row.gtc_critical = boundary;
        if row.status != "ok" {
            unconverged += 1;
        }
        table.push_row(point_cells(&row, &orders, true));
    }
    Ok((table, RunOutcome { rows: specs.len(), unconverged }))
}

/// `squeezing`: the four-panel higher-order squeezing scan. The analytic
/// critical coupling is inserted into each panel grid (when it falls
/// inside the sweep window) because the squeezing dip narrows sharply with
/// the frame magnification `dx/dg̃_c = e^{-2r}`.
pub fn run_squeezing_scan(cfg: &mut Config) -> Result<(Table, RunOutcome)> {
    cfg.default_key("omega_b", "1");
    cfg.default_key("omega_ratio", "1e3");
    cfg.default_key("omega_anchor", "omega_b");
    cfg.default_key("orders", "2,4,6,8");
    cfg.default_key("frame", "squeezed");
    cfg.default_key("squeeze.include_critical", "true");
    cfg.default_key("squeeze.perfect_fraction", "0.1");
    cfg.default_key("squeeze.panels", "a,b,c,d");
    cfg.default_key("squeeze.a.alpha", "0");
    cfg.default_key("squeeze.a.xi_ratio", "0");
    cfg.default_key("squeeze.a.min", "0.5");
    cfg.default_key("squeeze.a.max", "1.5");
    cfg.default_key("squeeze.a.count", "21");
    cfg.default_key("squeeze.b.alpha", "0");
    cfg.default_key("squeeze.b.xi_ratio", "0.245");
    cfg.default_key("squeeze.b.min", "0.04");
    cfg.default_key("squeeze.b.max", "0.26");
    cfg.default_key("squeeze.b.count", "12");
    cfg.default_key("squeeze.c.alpha", "1.5");
    cfg.default_key("squeeze.c.xi_ratio", "0");
    cfg.default_key("squeeze.c.min", "0.2");
    cfg.default_key("squeeze.c.max", "3.0");
    cfg.default_key("squeeze.c.count", "15");
    cfg.default_key("squeeze.d.alpha", "1.5");
    cfg.default_key("squeeze.d.xi_ratio", "0.26");
    cfg.default_key("squeeze.d.min", "0.18");
    cfg.default_key("squeeze.d.max", "0.45");
    cfg.default_key("squeeze.d.count", "12");
    Numerics::install_defaults(cfg);

    let numerics = Numerics::from_config(cfg)?;
    let orders = parse_orders(cfg)?;
    if orders.is_empty() {
        return Err(Error::Config("squeezing scan needs a non-empty orders list".into()));
    }
    let frame = parse_frame(cfg)?;
    let omega_b = cfg.get_f64("omega_b")?;
    let omega_ratio = cfg.get_f64("omega_ratio")?;
    let anchor = OmegaAnchor::parse(cfg.get_str("omega_anchor")?)?;
    let include_critical = cfg.get_bool("squeeze.include_critical")?;
    let perfect_fraction = cfg.get_f64("squeeze.perfect_fraction")?;
    let panels: Vec<String> = cfg
        .get_str("squeeze.panels")?
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();

    let mut specs: Vec<PointSpec> = Vec::new();
    let mut panel_of: Vec<String> = Vec::new();
    for panel in &panels {
        let alpha = cfg.get_f64(&format!("squeeze.{panel}.alpha"))?;
        let xi_ratio = cfg.get_f64(&format!("squeeze.{panel}.xi_ratio"))?;
        let min = cfg.get_f64(&format!("squeeze.{panel}.min"))?;
        let max = cfg.get_f64(&format!("squeeze.{panel}.max"))?;
        let count = cfg.get_usize(&format!("squeeze.{panel}.count"))?;
        let mut grid = linspace(min, max, count);
        if include_critical {
            if let CriticalCoupling::Transition(gc) = critical_coupling(alpha, xi_ratio) {
                if gc > min && gc < max && grid.iter().all(|&v| (v - gc).abs() > 1e-12) {
                    grid.push(gc);
                    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
                }
            }
        }
        for v in grid {
            specs.push(PointSpec {
                omega_b,
                alpha,
                xi_ratio,
                coupling: CouplingCoord::GtildeC(v),
                omega_ratio,
                anchor,
                orders: orders.clone(),
                frame,
            });
            panel_of.push(panel.clone());
        }
    }

    let rows = evaluate_grid(&specs, &numerics);
    let mut cols: Vec<String> = vec!["panel".to_string()];
    cols.extend(point_columns(&orders, false));
    let mut table = Table::new("squeezing", &cols.iter().map(|s| s.as_str()).collect::<Vec<_>>());
    let mut unconverged = 0;
    for (row, panel) in rows.iter().zip(&panel_of) {
        if row.status != "ok" {
            unconverged += 1;
        }
        let mut cells = vec![Cell::S(panel.clone())];
        cells.extend(point_cells(row, &orders, false));
        table.push_row(cells);
    }

    // Per-panel, per-order argmin summary in the footer.
    for panel in &panels {
        for (oi, &order) in orders.iter().enumerate() {
            let mut best: Option<(f64, f64, f64)> = None; // (moment, gtc, threshold)
            for (row, p) in rows.iter().zip(&panel_of) {
                if p != panel || row.status != "ok" {
                    continue;
                }
                if let Some(m) = row.moments.get(oi) {
                    if best.map_or(true, |(bm, _, _)| m.moment < bm) {
                        best = Some((m.moment, row.gtc, m.threshold));
                    }
                }
            }
            if let Some((moment, gtc, threshold)) = best {
                table.footer.push(format!(
                    "panel {panel} N={order}: min_moment={moment:.6e} at gtc={gtc:.6} threshold={threshold:.6e} below_perfect_fraction={}",
                    moment < perfect_fraction * threshold
                ));
            }
        }
    }
    Ok((table, RunOutcome { rows: rows.len(), unconverged }))
}

/// Least-squares slope of `ln(y)` against `ln(x)`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    cov / var
}

/// One row of the elimination-validation report.
#[derive(Debug, Clone)]
pub struct EliminationRow {
    pub ratio: f64,
    pub g_enh: f64,
    pub xi: f64,
    pub e_linearized: f64,
    pub e_effective: f64,
    pub abs_diff: f64,
    pub status: String,
}

/// Core of `validate-elimination`, reusable from tests: ground energies of
/// the two-mode linearized model against the effective model over a list
/// of `G/delta_a_tilde` ratios, plus the fitted power-law exponent.
pub fn elimination_report(
    ratios: &[f64],
    delta_over_omega_b: f64,
    omega_ratio_b: f64,
    alpha: f64,
    gtc: f64,
    cutoff_a: usize,
    cutoff_b: usize,
    numerics: &Numerics,
) -> Result<(Vec<EliminationRow>, f64)> {
    let omega_b = 1.0;
    let delta = delta_over_omega_b * omega_b;
    let big_omega = omega_ratio_b * omega_b;
    let g_c = (omega_b * big_omega).sqrt() / 2.0;
    let solve = numerics.solve_options();

    let mut rows = Vec::with_capacity(ratios.len());
    for &ratio in ratios {
        let g_enh = ratio * delta;
        let run = || -> Result<(f64, f64, f64)> {
            let params = ModelParams::new(
                omega_b,
                big_omega,
                alpha,
                gtc * g_c,
                XiSpec::Optomech { g_enh, delta_a_tilde: delta },
            )?;
            let two_mode = HilbertSpace::new(true, &[cutoff_a, cutoff_b])?;
            let h_lin = build_h_linearized(&params, &two_mode)?;
            let lin = diagonalize_in_space(&h_lin, &two_mode, 1, &solve)?;
            let one_mode = HilbertSpace::qubit_boson(cutoff_b)?;
            let h_eff = build_h_effective(&params, &one_mode)?;
            let eff = diagonalize_in_space(&h_eff, &one_mode, 1, &solve)?;
            Ok((lin.ground_energy(), eff.ground_energy(), params.xi()?))
        };
        match run() {
            Ok((e_lin, e_eff, xi)) => rows.push(EliminationRow {
                ratio,
                g_enh,
                xi,
                e_linearized: e_lin,
                e_effective: e_eff,
                abs_diff: (e_lin - e_eff).abs(),
                status: "ok".into(),
            }),
            Err(e) => rows.push(EliminationRow {
                ratio,
                g_enh,
                xi: f64::NAN,
                e_linearized: f64::NAN,
                e_effective: f64::NAN,
                abs_diff: f64::NAN,
                status: format!("error: {e}"),
            }),
        }
    }
    let good: Vec<&EliminationRow> =
        rows.iter().filter(|r| r.status == "ok" && r.abs_diff > 0.0).collect();
    let exponent = if good.len() >= 2 {
        log_log_slope(
            &good.iter().map(|r| r.ratio).collect::<Vec<_>>(),
            &good.iter().map(|r| r.abs_diff).collect::<Vec<_>>(),
        )
    } else {
        f64::NAN
    };
    Ok((rows, exponent))
}

/// `validate-elimination`: compare the two-mode linearized model against
/// the effective model across dispersive ratios.
pub fn run_validate_elimination(cfg: &mut Config) -> Result<(Table, RunOutcome)> {
    cfg.default_key("elim.ratios", "0.01,0.02,0.04,0.08");
    cfg.default_key("elim.delta_over_omega_b", "20");
    cfg.default_key("elim.omega_ratio_b", "20");
    cfg.default_key("elim.alpha", "1");
    cfg.default_key("elim.gtc", "0.5");
    cfg.default_key("elim.cutoff_a", "20");
    cfg.default_key("elim.cutoff_b", "200");
    Numerics::install_defaults(cfg);

    let numerics = Numerics::from_config(cfg)?;
    let (rows, exponent) = elimination_report(
        &cfg.get_f64_list("elim.ratios")?,
        cfg.get_f64("elim.delta_over_omega_b")?,
        cfg.get_f64("elim.omega_ratio_b")?,
        cfg.get_f64("elim.alpha")?,
        cfg.get_f64("elim.gtc")?,
        cfg.get_usize("elim.cutoff_a")?,
        cfg.get_usize("elim.cutoff_b")?,
        &numerics,
    )?;

    let mut table = Table::new(
        "validate-elimination",
        &["status", "ratio", "g_enh", "xi", "e_linearized", "e_effective", "abs_diff"],
    );
    let mut unconverged = 0;
    for r in &rows {
        if r.status != "ok" {
            unconverged += 1;
        }
        table.push_row(vec![
            Cell::S(r.status.clone()),
            Cell::F(r.ratio),
            Cell::F(r.g_enh),
            Cell::F(r.xi),
            Cell::F(r.e_linearized),
            Cell::F(r.e_effective),
            Cell::F(r.abs_diff),
        ]);
    }
    table.footer.push(format!("fit_exponent = {exponent:.6}"));
    Ok((table, RunOutcome { rows: rows.len(), unconverged }))
}

/// `convergence`: truncation study at one point, one row per cutoff step.
pub fn run_convergence(cfg: &mut Config) -> Result<(Table, RunOutcome)> {
    cfg.default_key("omega_b", "1");
    cfg.default_key("alpha", "0");
    cfg.default_key("xi_ratio", "0");
    cfg.default_key("gtc", "0.5");
    cfg.default_key("omega_ratio", "1e3");
    cfg.default_key("omega_anchor", "omega_s");
    cfg.default_key("orders", "");
    cfg.default_key("frame", "squeezed");
    cfg.default_key("conv.start_cutoff", "24");
    Numerics::install_defaults(cfg);

    let numerics = Numerics::from_config(cfg)?;
    let spec = base_point_spec(cfg)?;
    let frame = resolve_frame(&spec)?;
    let x = frame.gtilde_c_s;
    let beta_sq = if x > 1.0 {
        frame.big_omega / (4.0 * frame.omega_s) * (x * x - x.powi(-2))
    } else {
        0.0
    };
    let displacement = match numerics.predisplace {
        PredisplaceMode::On => beta_sq.sqrt(),
        PredisplaceMode::Off => 0.0,
        PredisplaceMode::Auto if beta_sq > numerics.predisplace_min_beta_sq => beta_sq.sqrt(),
        PredisplaceMode::Auto => 0.0,
    };
    let opts = ConvergenceOptions {
        tol: numerics.tol,
        growth: 1.5,
        ceiling: numerics.cutoff_max,
        k: numerics.k_states,
        solve: numerics.solve_options(),
    };
    let report = converge_truncation(
        |cutoffs| {
            let space = HilbertSpace::qubit_boson(cutoffs[0])?;
            let h = build_h_squeezed_displaced(&frame, &space, displacement)?;
            let symmetry =
                if displacement == 0.0 { Some(parity_operator(&space)?) } else { None };
            Ok((h, space, symmetry))
        },
        |spectrum, space| {
            let rep = g2_numeric(
                spectrum.ground_state(),
                space,
                ModeView::displaced(0, displacement),
                f64::MIN_POSITIVE,
            )?;
            Ok(rep.n_mean)
        },
        &[cfg.get_usize("conv.start_cutoff")?],
        &opts,
    )?;

    let mut table = Table::new(
        "convergence",
        &["step", "cutoff", "observable", "ground_energy", "rel_change"],
    );
    for (i, step) in report.history.iter().enumerate() {
        table.push_row(vec![
            Cell::from_usize(i),
            Cell::from_usize(step.cutoffs[0]),
            Cell::F(step.observable),
            Cell::F(step.ground_energy),
            Cell::F(step.rel_change),
        ]);
    }
    table.footer.push(format!(
        "converged = {} monotone = {} predisplaced = {}",
        report.spectrum.converged,
        report.monotone,
        displacement != 0.0
    ));
    let unconverged = usize::from(!report.spectrum.converged);
    Ok((table, RunOutcome { rows: report.history.len(), unconverged }))
}
