use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use serde::Serialize;
use serde_json::json;

use ionwire::coupling::effective_frequency;
use ionwire::dynamics::integrator::{IntegratorConfig, Precision};
use ionwire::dynamics::{
    in_phase_state, integrate_at, propagate_periodic, EomCoefficients, MotionState, Temperatures, TrajectoryRow,
    TriSystem,
};
use ionwire::ensemble::{
    exchange_time, run_ensemble, uniform_times, write_summary_csv, write_trajectories_csv, DetuningMode,
    EnsembleConfig, Propagation,
};
use ionwire::mathieu::{solve_floquet, Tongue};
use ionwire::model::{DriveParams, Form, ParticleCloud, Species, WireSpec};
use ionwire::quantum::{amplitudes_at, analytic_temperatures, numeric_amplitudes, plan_exchange, TripartiteCoupling};
use ionwire::sweep::{locate_working_point, run_sweep, summarize, sweep_cell, write_csv, SweepCell, WorkingPoint};
use ionwire::{DoubleDouble, FloquetSolution, Real};

use crate::config::{species, IonTrap, RunConfig};
use crate::error::Failure;
use crate::manifest::{file_name, output_dir, Manifest};
use crate::units::Frequency;

/// The exchange system described by `[traps]`, `[wire]` and `[drive]`.
pub struct Setup {
    pub sys: TriSystem,
    pub sol: FloquetSolution,
    pub working_point: WorkingPoint,
    pub g1: f64,
    pub g2: f64,
    pub t_ex: f64,
}

fn ion_cloud(trap: &IonTrap, wire: &WireSpec) -> Result<ParticleCloud, Failure> {
    let s = species(&trap.species)?;
    let d = trap.distance.value();
    let w = trap.frequency.angular();
    let omega = if trap.effective {
        w
    } else {
        effective_frequency(&ParticleCloud::new(s.clone(), trap.count, w, Form::Bare, d)?, wire)?
    };
    Ok(ParticleCloud::new(s, trap.count, omega, Form::Effective, d)?)
}

pub fn setup(cfg: &RunConfig) -> Result<Setup, Failure> {
    let wires = [WireSpec::new(cfg.wire.capacitance.value())?, WireSpec::new(cfg.wire.capacitance_2.value())?];
    let ion1 = ion_cloud(&cfg.traps.ion1, &wires[0])?;
    let ion2 = ion_cloud(&cfg.traps.ion2, &wires[1])?;
    let et = &cfg.traps.electron;
    let electron = species(&et.species)?;
    let d = &cfg.drive;
    let wp = locate_working_point(d.ratio, d.q, d.k, d.tongue, ion1.species.mass / electron.mass)?;
    let omega_d = d.ratio * ion1.trap_frequency;
    let e = ParticleCloud::new(electron, et.count, omega_d * wp.a.sqrt() / 2.0, Form::Effective, et.distance.value())?;
    let drive = DriveParams::new(wp.eta_prime, omega_d, Form::Effective)?;
    let sys = TriSystem::new(ion1, e, et.distance_2.value(), ion2, wires, drive)?;
    let sol = solve_floquet(sys.mathieu_params()?, None)?;
    let (g1, g2) = sys.coupling_rates(&sol, d.k)?;
    let t_ex = exchange_time(g1, g2)?;
    Ok(Setup { sys, sol, working_point: wp, g1, g2, t_ex })
}

fn create(path: &PathBuf) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Io(format!("cannot create {}: {e}", path.display())))
}

fn nearest_cell(cells: &[SweepCell], eta: f64, ratio: f64) -> Option<&SweepCell> {
    cells.iter().min_by(|a, b| {
        let da = (a.eta_prime - eta).hypot(a.ratio - ratio);
        let db = (b.eta_prime - eta).hypot(b.ratio - ratio);
        da.total_cmp(&db)
    })
}

pub fn stability(cfg: &RunConfig) -> Result<(), Failure> {
    let grid = cfg.sweep.grid()?;
    let cells = run_sweep(&grid)?;
    let dir = output_dir(&cfg.output.dir)?;
    let csv_path = dir.join(format!("stability_k{}.csv", grid.k));
    let mut out = create(&csv_path)?;
    write_csv(&cells, &mut out)?;
    out.flush()?;

    let d = &cfg.drive;
    let wp = locate_working_point(d.ratio, d.q, d.k, d.tongue, grid.mass_ratio)?;
    let at_wp = sweep_cell(wp.eta_prime, wp.omega_e_over_omega_d, grid.k, grid.mass_ratio);
    let mut m = Manifest::new("stability", cfg).units(&[
        ("eta_prime", "1"),
        ("ratio_e_d", "1"),
        ("mu", "1"),
        ("R_k", "1"),
        ("ratio_e_i", "1"),
    ]);
    m.outputs.push(file_name(&csv_path));
    m.results = json!({
        "summary": summarize(&grid, &cells),
        "working_point": wp,
        "working_point_cell": at_wp,
        "nearest_grid_cell": nearest_cell(&cells, wp.eta_prime, wp.omega_e_over_omega_d),
    });
    m.write(&dir.join(format!("stability_k{}.json", grid.k)))?;
    eprintln!(
        "stability: {} cells ({} stable) -> {}",
        cells.len(),
        cells.iter().filter(|c| c.stable).count(),
        csv_path.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct WorkpointReport {
    species: String,
    tongue: Tongue,
    k: i64,
    mu: f64,
    #[serde(rename = "A")]
    a: f64,
    #[serde(rename = "Q")]
    q: f64,
    eta_prime: f64,
    omega_e_ratio: f64,
    omega_e_over_omega_d: f64,
    #[serde(rename = "R_k")]
    r_k: f64,
}

pub fn workpoint(ratio: f64, q: f64, k: i64, species_name: &str, tongue: Tongue) -> Result<(), Failure> {
    let ion = species(species_name)?;
    let wp = locate_working_point(ratio, q, k, tongue, ion.mass / Species::electron().mass)?;
    let report = WorkpointReport {
        species: ion.name,
        tongue,
        k: wp.k,
        mu: wp.mu,
        a: wp.a,
        q: wp.q,
        eta_prime: wp.eta_prime,
        omega_e_ratio: wp.omega_e_over_omega_i,
        omega_e_over_omega_d: wp.omega_e_over_omega_d,
        r_k: wp.r_k,
    };
    println!("{}", serde_json::to_string_pretty(&report).map_err(|e| Failure::Io(e.to_string()))?);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum AmplitudeSource {
    Closed,
    Numeric,
}

pub fn entangle(
    g: Frequency,
    m: i64,
    n: i64,
    samples: usize,
    source: AmplitudeSource,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    if samples == 0 {
        return Err(Failure::Config("--samples must be positive".into()));
    }
    let g = g.angular();
    let plan = plan_exchange(g, m, n)?;
    let times: Vec<f64> = (0..=samples).map(|i| plan.tau * i as f64 / samples as f64).collect();
    let states = match source {
        AmplitudeSource::Closed => times.iter().map(|&t| amplitudes_at(g, plan.delta, t)).collect(),
        AmplitudeSource::Numeric => numeric_amplitudes(&TripartiteCoupling::symmetric(g, plan.delta), &times)?,
    };
    let sink: Box<dyn Write> = match &out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["t", "re_c100", "im_c100", "re_c010", "im_c010", "re_c001", "im_c001", "norm"])?;
    for (t, s) in times.iter().zip(&states) {
        let row = [*t, s.c100.re, s.c100.im, s.c010.re, s.c010.im, s.c001.re, s.c001.im, s.norm_sq()];
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    eprintln!("{}", serde_json::to_string(&plan).map_err(|e| Failure::Io(e.to_string()))?);
    Ok(())
}

fn propagate_as<T: Real>(
    c: &EomCoefficients,
    init: &MotionState<f64>,
    times: &[f64],
    integ: &IntegratorConfig,
    prop: Propagation,
) -> Result<Vec<MotionState<f64>>, Failure> {
    let init = MotionState::<T>::from_f64(init);
    let states = match prop {
        Propagation::PeriodMap => propagate_periodic(c, &init, times, integ)?,
        Propagation::Direct => integrate_at(c, &init, times, integ)?.0,
    };
    Ok(states.iter().map(MotionState::to_f64).collect())
}

fn propagate(
    c: &EomCoefficients,
    init: &MotionState<f64>,
    times: &[f64],
    integ: &IntegratorConfig,
    prop: Propagation,
) -> Result<Vec<MotionState<f64>>, Failure> {
    match integ.precision {
        Precision::Double => propagate_as::<f64>(c, init, times, integ, prop),
        Precision::Extended => propagate_as::<DoubleDouble>(c, init, times, integ, prop),
    }
}

pub fn exchange(cfg: &RunConfig, check: bool) -> Result<(), Failure> {
    let ex = &cfg.exchange;
    let threshold = match (check, cfg.check.max_deviation) {
        (true, None) => return Err(Failure::Config("--check needs [check] max_deviation".into())),
        (_, t) => t.map(|t| t.value()),
    };
    if ex.samples == 0 {
        return Err(Failure::Config("[exchange] samples must be positive".into()));
    }
    let s = setup(cfg)?;
    let integ = cfg.integrator.config()?;
    let mut c = s.sys.coefficients();
    if !ex.coupled {
        c = EomCoefficients { eta: 0.0, ..c.decoupled() };
    }
    let (t1, t2) = (ex.t_ion1.value(), ex.t_ion2.value());
    let init = in_phase_state(t1, t2, &c);
    let t_end = ex.t_end.map_or(s.t_ex + 1e-3, |t| t.value());
    let mut times = uniform_times(t_end, ex.samples);
    if s.t_ex < t_end {
        let at = times.partition_point(|&t| t < s.t_ex);
        if times[at] != s.t_ex {
            times.insert(at, s.t_ex);
        }
    }
    let states = propagate(&c, &init, &times, &integ, ex.propagation)?;
    let analytic = |t: f64| if ex.coupled { analytic_temperatures(s.g1, s.g2, t1, t2, t) } else { (t1, t2) };

    let dir = output_dir(&cfg.output.dir)?;
    let traj_path = dir.join("exchange_trajectory.csv");
    let mut w = csv::Writer::from_writer(create(&traj_path)?);
    for st in &states {
        w.serialize(TrajectoryRow::new(&c, st))?;
    }
    w.flush()?;
    let temp_path = dir.join("exchange_temperatures.csv");
    let mut w = csv::Writer::from_writer(create(&temp_path)?);
    w.write_record(["t", "T_Be", "T_P", "T_Be_analytic", "T_P_analytic"])?;
    let mut gap: Option<f64> = None;
    for st in &states {
        let (tb, _, tp) = c.temperatures(st);
        let (ab, ap) = analytic(st.t);
        w.write_record([st.t, tb, tp, ab, ap].iter().map(|v| v.to_string()))?;
        if (st.t - s.t_ex).abs() <= 1e-3 {
            gap = Some(gap.unwrap_or(0.0).max((tp - ap).abs()));
        }
    }
    w.flush()?;

    let halving = if ex.halving_check {
        let half = IntegratorConfig { abs_tol: integ.abs_tol / 2.0, rel_tol: integ.rel_tol / 2.0, ..integ.clone() };
        let again = propagate(&c, &init, &times, &half, ex.propagation)?;
        let delta = states
            .iter()
            .zip(&again)
            .map(|(a, b)| (c.temperatures(a).2 - c.temperatures(b).2).abs())
            .fold(0.0, f64::max);
        Some(delta)
    } else {
        None
    };

    let mut m = Manifest::new("exchange", cfg).units(&[
        ("t", "s"),
        ("x_Be", "m"),
        ("v_Be", "m/s"),
        ("x_e", "m"),
        ("v_e", "m/s"),
        ("x_P", "m"),
        ("v_P", "m/s"),
        ("T_Be", "K"),
        ("T_e_inst", "K"),
        ("T_P", "K"),
        ("T_Be_analytic", "K"),
        ("T_P_analytic", "K"),
    ]);
    m.method = Some(integ.method_name());
    m.outputs = vec![file_name(&traj_path), file_name(&temp_path)];
    m.results = json!({
        "working_point": s.working_point,
        "g1": s.g1,
        "g2": s.g2,
        "t_ex": s.t_ex,
        "max_deviation_near_t_ex": gap,
        "tolerance_halving_change": halving,
    });
    m.write(&dir.join("exchange.json"))?;
    eprintln!(
        "exchange: t_ex = {:.4} ms, max |T_P - analytic| within 1 ms of t_ex = {}",
        s.t_ex * 1e3,
        gap.map_or("n/a".into(), |g| format!("{g:.3e} K"))
    );
    if let Some(limit) = threshold {
        match gap {
            Some(g) if g <= limit => {}
            Some(g) => return Err(Failure::Check(format!("deviation {g:e} K exceeds {limit:e} K"))),
            None => return Err(Failure::Check("no samples within 1 ms of t_ex".into())),
        }
    }
    Ok(())
}

pub fn ensemble(cfg: &RunConfig, check: bool) -> Result<(), Failure> {
    let en = &cfg.ensemble;
    let widths = en.delta_omega.to_vec();
    let range = match (check, cfg.check.mean_tp) {
        (true, None) => return Err(Failure::Config("--check needs [check] mean_tp".into())),
        (true, Some(_)) if widths.len() != 1 => {
            return Err(Failure::Config("--check needs a single [ensemble] delta_omega".into()))
        }
        (_, r) => r.map(|[lo, hi]| (lo.value(), hi.value())),
    };
    if en.samples == 0 {
        return Err(Failure::Config("[ensemble] samples must be positive".into()));
    }
    let s = setup(cfg)?;
    let t_end = en.t_end.map_or(s.t_ex, |t| t.value());
    let sample_times = uniform_times(t_end, en.samples);
    let dir = output_dir(&cfg.output.dir)?;
    let mut m = Manifest::new("ensemble", cfg).units(&[
        ("t", "s"),
        ("mean_TP", "K"),
        ("p5_TP", "K"),
        ("p95_TP", "K"),
        ("TP", "K"),
        ("delta_omega", "Hz (ordinary frequency)"),
        ("reduction", "1"),
    ]);
    let integ = cfg.integrator.config()?;
    m.method = Some(integ.method_name());
    let scan_path = dir.join("ensemble_scan.csv");
    let mut scan = csv::Writer::from_writer(create(&scan_path)?);
    scan.write_record(["delta_omega", "t", "mean_TP", "p5_TP", "p95_TP", "n_ok", "reduction"])?;
    let mut results = vec![];
    let t_p0 = en.t_ion2.value();
    for dw in &widths {
        let std = match en.detuning {
            DetuningMode::Additive => dw.angular(),
            DetuningMode::Multiplicative => dw.angular() / s.sys.be.trap_frequency,
        };
        let ec = EnsembleConfig {
            n_traj: en.n_traj,
            delta_omega_std: std,
            master_seed: en.seed,
            temperatures: Temperatures { be: en.t_ion1.value(), e: en.t_electron.value(), p: t_p0 },
            sample_times: sample_times.clone(),
            integrator: integ.clone(),
            detuning: en.detuning,
            propagation: en.propagation,
        };
        let r = run_ensemble(&ec, &s.sys, &s.sol)?;
        let tag = format!("{}mHz", dw.value() * 1e3);
        let summary = dir.join(format!("ensemble_summary_{tag}.csv"));
        let mut out = create(&summary)?;
        write_summary_csv(&r, &mut out)?;
        out.flush()?;
        m.outputs.push(file_name(&summary));
        if en.write_trajectories {
            let p = dir.join(format!("ensemble_trajectories_{tag}.csv"));
            let mut out = create(&p)?;
            write_trajectories_csv(&r, &mut out)?;
            out.flush()?;
            m.outputs.push(file_name(&p));
        }
        let last = r.aggregates.last().expect("at least one sample");
        let reduction = 1.0 - last.mean / t_p0;
        let row = [dw.value(), last.t, last.mean, last.p5, last.p95, last.n_ok as f64, reduction];
        scan.write_record(row.iter().map(|v| v.to_string()))?;
        eprintln!(
            "ensemble: delta_omega = {} mHz, mean T_P({:.3} ms) = {:.4e} K, reduction {:.1}%, {} failed",
            dw.value() * 1e3,
            last.t * 1e3,
            last.mean,
            reduction * 100.0,
            r.n_failed
        );
        results.push(json!({
            "delta_omega": dw.value(),
            "t": last.t,
            "mean_TP": last.mean,
            "p5_TP": last.p5,
            "p95_TP": last.p95,
            "n_failed": r.n_failed,
            "reduction": reduction,
        }));
    }
    scan.flush()?;
    m.outputs.push(file_name(&scan_path));
    m.results = json!({ "working_point": s.working_point, "g1": s.g1, "g2": s.g2, "t_ex": s.t_ex, "runs": results });
    m.write(&dir.join("ensemble.json"))?;
    if let Some((lo, hi)) = range {
        let mean = results[0]["mean_TP"].as_f64().unwrap_or(f64::NAN);
        if !(lo..=hi).contains(&mean) {
            return Err(Failure::Check(format!("mean T_P {mean:e} K outside [{lo:e}, {hi:e}] K")));
        }
    }
    Ok(())
}
