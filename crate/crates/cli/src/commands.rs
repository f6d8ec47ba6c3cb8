//! The five subcommands. Each returns its tables and records in memory; writing
//! files is left to the caller.

use std::sync::Arc;
use std::time::Instant;

use nek_core::asymptotics::{
    assemble_disk, assemble_ellipse, leading_term, log_term, NETExpansion, ProviderData, SojournField, WindowData,
};
use nek_core::disk_operators::{disk_integrals, elliptic_ka, DiskIntegrals, DiskOperators, DiskQuadrature};
use nek_core::geometry::{DomainModel, WindowSpec};
use nek_core::green_kernel::{kernel_singular, GreenProvider, SignConvention};
use nek_core::mc_escape::{
    dt_refinement, estimate_mean_escape, estimate_with_record, EscapeEstimate, RefinedEstimate, SDEConfig,
    StartPoint, Target,
};
use nek_core::potential::PotentialField;
use nek_core::{NekError, Vec3};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::output::{Cell, CommandOutput, Table};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub convention: SignConvention,
    /// Doubles every disk quadrature order as a self-check.
    pub order_doubled: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            convention: SignConvention::CurvaturePlusDrift,
            order_doubled: false,
        }
    }
}

impl RunOptions {
    fn quadrature(&self) -> DiskQuadrature {
        if self.order_doubled {
            DiskQuadrature::default().doubled()
        } else {
            DiskQuadrature::default()
        }
    }
}

/// Independent seed for row `row` of a table (splitmix64 finaliser).
pub fn row_seed(seed: u64, row: usize) -> u64 {
    let mut z = seed.wrapping_add((row as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Disk integrals for one aspect ratio; `None` for the disk, which needs none.
type AspectIntegrals = Result<Option<DiskIntegrals<f64>>, NekError>;

fn status(e: &NekError) -> String {
    e.to_string()
}

struct Context {
    domain: DomainModel<f64>,
    phi: PotentialField<f64>,
    provider: Arc<dyn GreenProvider<f64>>,
    provider_data: Result<ProviderData<f64>, NekError>,
}

impl Context {
    fn new(cfg: &ExperimentConfig) -> Result<Self, CliError> {
        let domain = cfg.domain()?;
        let phi = cfg.potential_field()?;
        let provider = cfg.provider(&domain)?;
        let provider_data = ProviderData::new(provider.as_ref(), &phi, cfg.window_center());
        Ok(Self {
            domain,
            phi,
            provider,
            provider_data,
        })
    }
}

/// Expansion at one `(ε, a)`, with whatever could be computed when something failed.
struct RowExpansion {
    window: Option<WindowSpec<f64>>,
    leading: Option<f64>,
    log_term: Option<f64>,
    expansion: Option<NETExpansion<f64>>,
    status: String,
}

impl RowExpansion {
    fn failed(window: Option<WindowSpec<f64>>, e: &NekError) -> Self {
        Self {
            window,
            leading: None,
            log_term: None,
            expansion: None,
            status: status(e),
        }
    }
}

fn row_expansion(
    ctx: &Context,
    cfg: &ExperimentConfig,
    eps: f64,
    a: f64,
    integrals: &AspectIntegrals,
    convention: SignConvention,
) -> RowExpansion {
    let window = match cfg.window(&ctx.domain, eps, a) {
        Ok(w) => w,
        Err(CliError::Core(e)) => return RowExpansion::failed(None, &e),
        Err(e) => return RowExpansion::failed(None, &NekError::InvalidArgument(e.to_string())),
    };
    let data = match WindowData::new(&ctx.domain, &ctx.phi, &window) {
        Ok(d) => d,
        Err(e) => return RowExpansion::failed(Some(window), &e),
    };
    let ka = match elliptic_ka(a) {
        Ok(k) => k.ka,
        Err(e) => return RowExpansion::failed(Some(window), &e),
    };
    let mut row = RowExpansion {
        window: Some(window),
        leading: Some(leading_term(ka, data.weighted_volume, a, eps)),
        log_term: Some(log_term(data.log_coefficient(convention), data.weighted_volume, eps)),
        expansion: None,
        status: "ok".into(),
    };
    let prov = match &ctx.provider_data {
        Ok(p) => p,
        Err(e) => {
            row.status = status(e);
            return row;
        }
    };
    let expansion = match integrals {
        Ok(None) => assemble_disk(eps, &data, prov, convention),
        Ok(Some(ints)) => assemble_ellipse(eps, ints, &data, prov, convention),
        Err(e) => {
            row.status = status(e);
            return row;
        }
    };
    row.leading = Some(expansion.leading);
    row.log_term = Some(expansion.log_term);
    row.expansion = Some(expansion);
    row
}

fn integrals_per_aspect(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
) -> Vec<(f64, AspectIntegrals)> {
    cfg.window
        .a
        .iter()
        .map(|&a| {
            let r = if a == 1.0 {
                Ok(None)
            } else {
                disk_integrals(a, opts.quadrature(), false).map(Some)
            };
            (a, r)
        })
        .collect()
}

pub const CONSTANTS_HEADER: [&str; 7] = ["eps", "a", "leading", "log_term", "constant_term", "total", "status"];

pub fn constants(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<CommandOutput, CliError> {
    let ctx = Context::new(cfg)?;
    let per_a = integrals_per_aspect(cfg, opts);
    let mut table = Table::new(&CONSTANTS_HEADER);
    for &eps in &cfg.window.eps {
        for (a, ints) in &per_a {
            let r = row_expansion(&ctx, cfg, eps, *a, ints, opts.convention);
            table.push(vec![
                eps.into(),
                (*a).into(),
                r.leading.into(),
                r.log_term.into(),
                r.expansion.map(|e| e.constant_term).into(),
                r.expansion.map(|e| e.total).into(),
                Cell::Text(r.status),
            ]);
        }
    }
    let mut out = CommandOutput::default();
    out.add_table("constants.csv", &table)?;
    Ok(out)
}

pub const OPERATORS_HEADER: [&str; 7] = ["a", "K_a", "I_log", "I_aniso", "RF_residual", "doubling_difference", "status"];

pub fn operators(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<CommandOutput, CliError> {
    let ops = DiskOperators::<f64>::new(DiskQuadrature::default());
    let mut table = Table::new(&OPERATORS_HEADER);
    for &a in &cfg.operators_a {
        let ka = elliptic_ka(a).map(|k| k.ka);
        let ints = disk_integrals(a, DiskQuadrature::default(), opts.order_doubled);
        // The composition is linear in F, so the two unit forces bound every case.
        let rf = [(1.0, 0.0), (0.0, 1.0)]
            .iter()
            .map(|&f| ops.check_rf_vanishing(a, f).map(f64::abs))
            .collect::<Result<Vec<_>, _>>()
            .map(|v| v.into_iter().fold(0.0, f64::max));
        let mut problems = Vec::new();
        let mut keep = |r: &Result<f64, NekError>| match r {
            Ok(v) => Cell::Num(*v),
            Err(e) => {
                problems.push(status(e));
                Cell::Na
            }
        };
        let ka_cell = keep(&ka);
        let ilog = keep(&ints.as_ref().map(|i| i.ilog).map_err(Clone::clone));
        let ianiso = keep(&ints.as_ref().map(|i| i.ianiso).map_err(Clone::clone));
        let rf_cell = keep(&rf);
        let doubling = ints.as_ref().ok().and_then(|i| i.doubling_difference);
        let status = if problems.is_empty() { "ok".to_string() } else { problems.join("; ") };
        table.push(vec![a.into(), ka_cell, ilog, ianiso, rf_cell, doubling.into(), Cell::Text(status)]);
    }
    let mut out = CommandOutput::default();
    out.add_table("operators.csv", &table)?;
    Ok(out)
}

pub const COMPARE_HEADER: [&str; 10] = [
    "eps",
    "a",
    "asymptotic_avg",
    "mc_mean",
    "mc_stderr",
    "rel_diff",
    "z_score",
    "mc_flagged",
    "seed",
    "status",
];

#[derive(Debug, Serialize)]
struct CompareRecord {
    command: &'static str,
    eps: f64,
    a: f64,
    seed: u64,
    target: String,
    config: SDEConfig<f64>,
    asymptotic_avg: Option<f64>,
    refinement: Option<RefinedEstimate<f64>>,
    estimate: Option<EscapeEstimate<f64>>,
    wall_time_s: f64,
    status: String,
}

/// Outcome of a single run or a refinement.
struct McSummary {
    mean: f64,
    stderr: f64,
    flagged: bool,
    refinement: Option<RefinedEstimate<f64>>,
    estimate: Option<EscapeEstimate<f64>>,
}

fn run_mc(
    ctx: &Context,
    window: &WindowSpec<f64>,
    cfg: &ExperimentConfig,
    sde: &SDEConfig<f64>,
) -> Result<McSummary, NekError> {
    let target = Target::Window(*window);
    if cfg.mc.refinement_levels >= 2 {
        let r = dt_refinement(&ctx.domain, &ctx.phi, &target, sde, cfg.mc.refinement_levels, cfg.mc.bias_model)?;
        Ok(McSummary {
            mean: r.mean,
            stderr: r.stderr,
            flagged: r.flagged || r.levels.iter().any(|l| l.flagged),
            refinement: Some(r),
            estimate: None,
        })
    } else {
        let e = estimate_mean_escape(&ctx.domain, &ctx.phi, &target, sde)?;
        Ok(McSummary {
            mean: e.mean,
            stderr: e.stderr,
            flagged: e.flagged,
            refinement: None,
            estimate: Some(e),
        })
    }
}

pub fn compare(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<CommandOutput, CliError> {
    let ctx = Context::new(cfg)?;
    let per_a = integrals_per_aspect(cfg, opts);
    let mut table = Table::new(&COMPARE_HEADER);
    let mut records = Vec::new();
    let mut out = CommandOutput::default();
    let mut row = 0;
    for &eps in &cfg.window.eps {
        for (a, ints) in &per_a {
            let seed = row_seed(cfg.mc.seed, row);
            row += 1;
            out.seeds.push(seed);
            let sde = cfg.sde_config(seed);
            let r = row_expansion(&ctx, cfg, eps, *a, ints, opts.convention);
            let mut problems = Vec::new();
            if r.status != "ok" {
                problems.push(r.status.clone());
            }
            let asym = match (&r.expansion, &r.window) {
                (Some(exp), Some(w)) => match SojournField::new(*exp, ctx.provider.clone(), *w).averaged() {
                    Ok(v) => Some(v),
                    Err(e) => {
                        problems.push(status(&e));
                        None
                    }
                },
                _ => None,
            };
            let t0 = Instant::now();
            let mc = match &r.window {
                Some(w) => match run_mc(&ctx, w, cfg, &sde) {
                    Ok(m) => Some(m),
                    Err(e) => {
                        problems.push(format!("monte carlo: {e}"));
                        None
                    }
                },
                None => None,
            };
            let wall = t0.elapsed().as_secs_f64();
            let mean = mc.as_ref().map(|m| m.mean);
            let se = mc.as_ref().map(|m| m.stderr);
            let flagged = mc.as_ref().map(|m| m.flagged);
            let both = asym.zip(mean);
            let rel = both.map(|(x, m)| (m - x) / x);
            let z = both.zip(se).map(|((x, m), s)| (m - x) / s);
            let status = if problems.is_empty() { "ok".to_string() } else { problems.join("; ") };
            table.push(vec![
                eps.into(),
                (*a).into(),
                asym.into(),
                mean.into(),
                se.into(),
                rel.into(),
                z.into(),
                flagged.map_or(Cell::Na, |f| Cell::Text(f.to_string())),
                Cell::Int(seed),
                Cell::Text(status.clone()),
            ]);
            let (refinement, estimate) = mc.map_or((None, None), |m| (m.refinement, m.estimate));
            records.push(CompareRecord {
                command: "compare",
                eps,
                a: *a,
                seed,
                target: r.window.map_or_else(|| "invalid window".into(), |w| Target::Window(w).describe()),
                config: sde,
                asymptotic_avg: asym,
                refinement,
                estimate,
                wall_time_s: wall,
                status,
            });
        }
    }
    out.add_table("compare.csv", &table)?;
    if cfg.wants_jsonl() {
        out.add_jsonl("mc_runs.jsonl", &records)?;
    }
    Ok(out)
}

pub const KERNEL_HEADER: [&str; 8] = [
    "distance",
    "chord",
    "coulomb",
    "log_term",
    "ii_difference",
    "drift_directional",
    "total_singular",
    "status",
];

pub fn kernel(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<CommandOutput, CliError> {
    let domain = cfg.domain()?;
    let phi = cfg.potential_field()?;
    let center = cfg.window_center();
    let frame = domain.boundary_frame(center)?;
    let force = phi.force(&domain, center)?;
    let alpha = cfg.kernel.direction_angle;
    let dir = frame.tangent_vector(alpha.cos(), alpha.sin());
    let mut table = Table::new(&KERNEL_HEADER);
    for &d in &cfg.kernel.distances {
        let y = domain.exp_map(center, dir * d);
        match kernel_singular(&domain, &frame, y, force, opts.convention) {
            Ok(k) => table.push(vec![
                d.into(),
                domain.chord_distance(center, y).into(),
                k.coulomb.into(),
                k.log_term.into(),
                k.ii_difference.into(),
                k.drift_directional.into(),
                k.total_singular.into(),
                Cell::Text("ok".into()),
            ]),
            Err(e) => {
                let mut row = vec![d.into()];
                row.extend(std::iter::repeat_n(Cell::Na, 6));
                row.push(Cell::Text(status(&e)));
                table.push(row);
            }
        }
    }
    let mut out = CommandOutput::default();
    out.add_table("kernel.csv", &table)?;
    Ok(out)
}

pub const CALIBRATE_HEADER: [&str; 9] = [
    "start",
    "expected",
    "mc_mean",
    "mc_stderr",
    "z_score",
    "n_absorbed",
    "n_censored",
    "seed",
    "status",
];

/// Fully absorbing sphere: `E τ = (R² − |x|²)/6`, averaging to `R²/15`.
pub fn mc_calibrate(cfg: &ExperimentConfig, _opts: &RunOptions) -> Result<CommandOutput, CliError> {
    let domain = cfg.domain()?;
    let r2 = cfg.radius * cfg.radius;
    let cases = [
        ("center", StartPoint::Point(Vec3::zero()), r2 / 6.0),
        ("uniform", StartPoint::UniformVolume, r2 / 15.0),
    ];
    let mut table = Table::new(&CALIBRATE_HEADER);
    let mut records = Vec::new();
    let mut out = CommandOutput::default();
    for (row, (name, start, expected)) in cases.into_iter().enumerate() {
        let seed = row_seed(cfg.mc.seed, row);
        out.seeds.push(seed);
        let sde = SDEConfig {
            start,
            ..cfg.sde_config(seed)
        };
        match estimate_with_record(name, &domain, &PotentialField::Zero, &Target::WholeBoundary, &sde) {
            Ok((e, rec)) => {
                table.push(vec![
                    Cell::Text(name.into()),
                    expected.into(),
                    e.mean.into(),
                    e.stderr.into(),
                    ((e.mean - expected) / e.stderr).into(),
                    Cell::Int(e.n_absorbed),
                    Cell::Int(e.n_censored),
                    Cell::Int(seed),
                    Cell::Text(if e.flagged { "censoring above threshold" } else { "ok" }.into()),
                ]);
                records.push(rec);
            }
            Err(e) => {
                let mut row = vec![Cell::Text(name.into()), expected.into()];
                row.extend(std::iter::repeat_n(Cell::Na, 5));
                row.push(Cell::Int(seed));
                row.push(Cell::Text(status(&e)));
                table.push(row);
            }
        }
    }
    out.add_table("mc_calibrate.csv", &table)?;
    if cfg.wants_jsonl() {
        out.add_jsonl("mc_runs.jsonl", &records)?;
    }
    Ok(out)
}
