//! Configuration loading and the experiment drivers behind the binary.

mod config;
mod csv;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

pub use config::{load_config, parse_config, BcConfig, Domain, IcConfig, MediumInput, OutputConfig, SimulationConfig};
pub use csv::{
    fmt_f64, read_initial_condition, read_snapshot, render_snapshot, snapshot_name, write_text, SnapshotRow,
    SNAPSHOT_HEADER,
};

use crate::adjoint_lab::{
    ab_quadratic_form, discretize_operator, fourier_field, grad_inverse, vainberg_defect, OperatorKind,
    SpaceTimeGrid, SpaceTimeMedium,
};
use crate::conservation::{energy_diagnostic, make_tangent_pair, msc_residual_2field, msc_residual_preissman, ResidualReport};
use crate::em_core::{FieldPoint, MediumSpec};
use crate::error::{Error, Result};
use crate::schemes::{bootstrap, Integrator, SchemeKind, SchemeState};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scheme: SchemeKind,
    pub steps: usize,
    pub final_time: f64,
    /// Max-norm error over all six field components at the final time.
    pub linf: Option<f64>,
    /// Trapezoidal L2 error over all six components.
    pub l2: Option<f64>,
    pub linf_h2: Option<f64>,
    pub energy_initial: f64,
    pub energy_final: f64,
    pub wall_time_s: f64,
    pub snapshots: Vec<PathBuf>,
}

impl RunReport {
    pub fn summary(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.6e}"));
        format!(
            "scheme {}: {} steps to t = {}\n  L_inf error {}  L2 error {}  L_inf(H2) {}\n  energy {:.12e} -> {:.12e}\n  wall time {:.3} s, {} snapshots",
            self.scheme,
            self.steps,
            self.final_time,
            opt(self.linf),
            opt(self.l2),
            opt(self.linf_h2),
            self.energy_initial,
            self.energy_final,
            self.wall_time_s,
            self.snapshots.len()
        )
    }
}

/// Runs the configured simulation and calls `observe(step, t, fields)` on
/// every level from 0 to the end.
pub fn simulate(
    cfg: &SimulationConfig,
    mut observe: impl FnMut(usize, f64, &[FieldPoint]) -> Result<()>,
) -> Result<RunReport> {
    let start = Instant::now();
    let grid = cfg.grid()?;
    let medium = cfg.medium_spec()?.sample(&grid)?;
    let sources = cfg.source.profile();
    let bc = cfg.boundary_condition()?;
    let ic = cfg.initial_condition(&grid)?;
    let nt = grid.nt();
    let periodic = bc.is_periodic();

    let mut state = bootstrap(cfg.scheme, &ic, &grid, &medium, &sources, &bc)?;
    let mut integrator = Integrator::new(cfg.scheme, &grid, &medium, &sources, &bc)?;
    let first = match &state {
        SchemeState::NinePoint(s) => s.prev.clone(),
        other => other.fields(),
    };
    observe(0, 0.0, &first)?;
    let mut last = first.clone();
    if let SchemeState::NinePoint(s) = &state {
        if nt >= 1 {
            observe(1, grid.time(1), &s.curr)?;
            last = s.curr.clone();
        }
    }
    while (state.level() as usize) < nt {
        state = integrator.step(&state)?;
        let level = state.level() as usize;
        last = state.fields();
        if let Some(i) = last.iter().position(|f| !f.is_finite()) {
            return Err(Error::State(format!("non-finite field at node {i}")).at_step(level));
        }
        observe(level, grid.time(level), &last)?;
    }
    let final_time = grid.time(nt);

    let (mut linf, mut l2, mut linf_h2) = (None, None, None);
    if cfg.has_exact_solution() {
        let (mut m, mut s, mut m2) = (0.0_f64, 0.0, 0.0_f64);
        for (i, f) in last.iter().enumerate() {
            let d = *f - cfg.exact_fields(grid.node_x(i), final_time)?;
            let w = if i == 0 || i == grid.nx() { 0.5 } else { 1.0 };
            m = m.max(d.max_abs());
            m2 = m2.max(d.h.y.abs());
            s += w * (d.h.norm_sq() + d.e.norm_sq());
        }
        linf = Some(m);
        l2 = Some((s * grid.dx()).sqrt());
        linf_h2 = Some(m2);
    }
    let energy = energy_diagnostic(&[first, last], &grid, &medium, periodic)?;
    Ok(RunReport {
        scheme: cfg.scheme,
        steps: nt,
        final_time,
        linf,
        l2,
        linf_h2,
        energy_initial: energy[0],
        energy_final: energy[1],
        wall_time_s: start.elapsed().as_secs_f64(),
        snapshots: Vec::new(),
    })
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Simulation with snapshot CSVs, a JSON report and optionally a gnuplot
/// script written to `out` (or the configured directory).
pub fn run(cfg: &SimulationConfig, out: Option<&Path>) -> Result<RunReport> {
    let dir = out.map_or_else(|| cfg.output.directory.clone(), Path::to_path_buf);
    create_dir(&dir)?;
    let grid = cfg.grid()?;
    let nt = grid.nt();
    let stride = cfg.output.snapshot_stride;
    let exact = cfg.has_exact_solution();
    let mut written = Vec::new();
    let mut report = simulate(cfg, |step, t, fields| {
        if step % stride != 0 && step != nt {
            return Ok(());
        }
        let rows = fields
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let x = grid.node_x(i);
                let exact_h2 = if exact {
                    let ex = cfg.exact_fields(x, t)?.h.y;
                    Some((ex, f.h.y - ex))
                } else {
                    None
                };
                Ok(SnapshotRow {
                    t,
                    x,
                    fields: *f,
                    exact_h2,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let path = dir.join(snapshot_name(step, nt));
        write_text(&path, &render_snapshot(&rows)?)?;
        written.push(path);
        Ok(())
    })?;
    report.snapshots = written;
    if cfg.output.gnuplot {
        let names: Vec<String> = report
            .snapshots
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect();
        write_text(&dir.join("plot.gp"), &gnuplot_script(&names, exact))?;
    }
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::State(e.to_string()))?;
    write_text(&dir.join("report.json"), &json)?;
    Ok(report)
}

fn gnuplot_script(snapshots: &[String], exact: bool) -> String {
    let mut s = String::from(
        "set datafile separator ','\nset key autotitle columnhead\nset xlabel 'x'\nset terminal pngcairo size 1000,600\n",
    );
    let list = snapshots.join(" ");
    let _ = writeln!(s, "files = \"{list}\"");
    s.push_str("set output 'h2_profiles.png'\nset ylabel 'H2'\n");
    s.push_str("plot for [f in files] f using 2:4 with lines title f\n");
    if let (true, Some(last)) = (exact, snapshots.last()) {
        s.push_str("set output 'h2_error.png'\nset ylabel 'error'\n");
        let _ = writeln!(
            s,
            "plot '{last}' using 2:10 with lines title 'H2 error', '{last}' using 2:(0.01*$9) with lines title '0.01 H2 exact'"
        );
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub nx: usize,
    pub dx: f64,
    pub dt: f64,
    pub linf: f64,
    pub l2: f64,
    /// Observed order against the previous row; `None` when undefined.
    pub order_linf: Option<f64>,
    pub order_l2: Option<f64>,
}

/// Refines `dx` and `dt` together `levels - 1` times. Periodic grids keep an
/// odd cell count, `nx -> 2 nx + 1`, and orders use the actual `dx` ratio.
pub fn convergence_study(base: &SimulationConfig, levels: usize) -> Result<Vec<ConvergenceRow>> {
    if levels < 3 {
        return Err(Error::Validation(format!(
            "a convergence study needs at least 3 levels (got {levels})"
        )));
    }
    base.validate()?;
    if !base.has_exact_solution() {
        return Err(Error::Validation(
            "a convergence study needs the exact plane-wave solution (exact initial data, zero source, constant medium)".into(),
        ));
    }
    let periodic = matches!(base.bc, BcConfig::Periodic);
    let mut configs = vec![base.clone()];
    for k in 1..levels {
        let prev = &configs[k - 1];
        let mut c = prev.clone();
        c.nx = if periodic { 2 * prev.nx + 1 } else { 2 * prev.nx };
        c.dt = base.dt / f64::from(1u32 << k.min(30));
        configs.push(c);
    }
    let results: Vec<Result<RunReport>> = std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|c| scope.spawn(move || simulate(c, |_, _, _| Ok(()))))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::State("solver thread panicked".into()))))
            .collect()
    });
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels);
    for (c, r) in configs.iter().zip(results) {
        let r = r?;
        let dx = c.domain.length / c.nx as f64;
        let (linf, l2) = (r.linf.unwrap_or(0.0), r.l2.unwrap_or(0.0));
        let order = |prev: Option<(f64, f64)>, e: f64| {
            prev.and_then(|(pe, pdx)| (pe > 0.0 && e > 0.0).then(|| (pe / e).ln() / (pdx / dx).ln()))
        };
        let prev = rows.last();
        rows.push(ConvergenceRow {
            nx: c.nx,
            dx,
            dt: c.dt,
            linf,
            l2,
            order_linf: order(prev.map(|p| (p.linf, p.dx)), linf),
            order_l2: order(prev.map(|p| (p.l2, p.dx)), l2),
        });
    }
    Ok(rows)
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let opt = |v: Option<f64>| v.map_or("undefined".to_string(), fmt_f64);
    let mut s = String::from("nx,dx,dt,linf,l2,order_linf,order_l2\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.nx,
            fmt_f64(r.dx),
            fmt_f64(r.dt),
            fmt_f64(r.linf),
            fmt_f64(r.l2),
            opt(r.order_linf),
            opt(r.order_l2)
        );
    }
    s
}

/// Builds a tangent pair from two seeds on the configured grid and reports
/// the discrete conservation residual.
pub fn msc_check(cfg: &SimulationConfig, seeds: [u64; 2]) -> Result<ResidualReport> {
    if cfg.scheme == SchemeKind::NinePoint {
        return Err(Error::Argument(
            "nine_point has no auxiliary-field tangents; set \"scheme\": \"preissman\" to check conservation".into(),
        ));
    }
    let grid = cfg.grid()?;
    let medium = cfg.medium_spec()?.sample(&grid)?;
    let bc = cfg.boundary_condition()?;
    let pair = make_tangent_pair(cfg.scheme, &grid, &medium, &bc, seeds, grid.nt())?;
    match cfg.scheme {
        SchemeKind::Preissman => msc_residual_preissman(&pair, &grid, &medium),
        _ => msc_residual_2field(&pair, &grid, &medium),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdjointRow {
    pub n: usize,
    pub h: f64,
    pub defect: f64,
    pub scale: f64,
    pub relative: f64,
    /// Quadratic form of the defect matrices, for `G1` only.
    pub ab_form: Option<f64>,
    pub defect_over_h2: f64,
}

impl AdjointRow {
    /// `defect - ab_form`, or the defect itself without a form.
    pub fn mismatch(&self) -> f64 {
        self.defect - self.ab_form.unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjointReport {
    pub kind: String,
    pub medium: String,
    pub rows: Vec<AdjointRow>,
}

impl AdjointReport {
    /// `|mismatch(h)| / |mismatch(h/2)|`, about 4 for a second-order match.
    pub fn mismatch_ratio(&self) -> Option<f64> {
        let (a, b) = (self.rows.first()?.mismatch(), self.rows.last()?.mismatch());
        (b != 0.0).then(|| (a / b).abs())
    }

    pub fn defect_ratio(&self) -> Option<f64> {
        let (a, b) = (self.rows.first()?.defect, self.rows.last()?.defect);
        (b != 0.0).then(|| (a / b).abs())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("operator,medium,n,h,defect,scale,relative,ab_form,mismatch,defect_over_h2\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},\"{}\",{},{},{},{},{},{},{},{}",
                self.kind,
                self.medium,
                r.n,
                fmt_f64(r.h),
                fmt_f64(r.defect),
                fmt_f64(r.scale),
                fmt_f64(r.relative),
                r.ab_form.map_or("".into(), fmt_f64),
                fmt_f64(r.mismatch()),
                fmt_f64(r.defect_over_h2)
            );
        }
        s
    }
}

/// Vainberg defect of `kind` at grid sizes `n` and `2n` on fixed smooth
/// test fields.
pub fn adjoint_check(kind: &str, medium: &MediumSpec, n: usize) -> Result<AdjointReport> {
    let op_kind: OperatorKind = kind.parse()?;
    medium.validate()?;
    let st_medium = SpaceTimeMedium::from_spec(medium);
    let mut rows = Vec::new();
    for n in [n, 2 * n] {
        let grid = SpaceTimeGrid::new(n, n)?;
        let op = discretize_operator(op_kind, &st_medium, &grid)?;
        let psi = fourier_field(&grid, 11, 1);
        let phi = fourier_field(&grid, 12, 1);
        let d = vainberg_defect(&op, &psi, &phi)?;
        let ab_form = match op_kind {
            OperatorKind::G1 => Some(ab_quadratic_form(
                &grid,
                grad_inverse(medium.eps),
                grad_inverse(medium.mu),
                &psi,
                &phi,
            )?),
            _ => None,
        };
        let h = grid.h();
        rows.push(AdjointRow {
            n,
            h,
            defect: d.defect,
            scale: d.scale,
            relative: d.relative(),
            ab_form,
            defect_over_h2: d.defect / (h * h),
        });
    }
    Ok(AdjointReport {
        kind: op_kind.to_string(),
        medium: medium.to_string(),
        rows,
    })
}
