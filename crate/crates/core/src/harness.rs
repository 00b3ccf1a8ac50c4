//! Scenario execution and evaluation: runs a controller against the
//! averaged or switched plant through parameter-step events and additive
//! disturbances, records uniformly sampled traces, reduces them to response
//! metrics, builds training datasets, and assembles the controller
//! comparison report.
//!
//! The controller is deliberately split from the live circuit: its law is
//! frozen on the scenario's initial parameters, while events mutate only
//! the plant. Error sensing still sees the real capacitor current, so a
//! load or source step shows up as a genuine model mismatch the controller
//! has to fight, not as silently updated gains.

use crate::adaptive_smc::{dnn_smc_duty, true_f, AdaptiveSmcState};
use crate::error::{Error, Result};
use crate::neural::{DataRow, Dataset, TrainedModel};
use crate::plant::{
    averaged_derivative, error_coordinates, euler_step, rk4_step, switched_derivative,
    ConverterParams, Disturbance, ErrorState, PlantState,
};
use crate::smc::{lyapunov_value, sliding_surface, smc_duty, SmcConfig};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Plant representation a scenario runs against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlantModel {
    /// Continuous duty, integrated with the fourth-order stepper at the
    /// scenario rate; the controller acts every step.
    Averaged,
    /// Binary gate from the PWM comparator; the duty is latched once per
    /// switching period and the circuit is integrated in 100 sub-steps per
    /// period. The trace is sampled at period boundaries.
    Switched,
}

/// Step change of one live circuit parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    LoadStep,
    VinStep,
}

/// A parameter step applied to the plant at a point in time. The new value
/// lands on the first trace sample at or after `time_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Event {
    pub time_s: f64,
    pub kind: EventKind,
    pub new_value: f64,
}

/// A complete experiment definition. Runs always start from the resting
/// state (zero current, zero output voltage).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub params: ConverterParams,
    pub duration_s: f64,
    pub dt_s: f64,
    pub model: PlantModel,
    pub events: Vec<Event>,
    pub additive_disturbance: Disturbance,
    pub seed: u64,
}

impl Scenario {
    /// Startup run with no events under the default circuit.
    pub fn startup(params: ConverterParams, duration_s: f64, dt_s: f64) -> Self {
        Scenario {
            params,
            duration_s,
            dt_s,
            model: PlantModel::Averaged,
            events: Vec::new(),
            additive_disturbance: Disturbance::none(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.additive_disturbance.validate()?;
        if !(self.duration_s >= 0.0 && self.duration_s.is_finite()) {
            return Err(Error::invalid(
                "duration_s",
                "must be finite and nonnegative",
                self.duration_s,
            ));
        }
        if !(self.dt_s > 0.0 && self.dt_s.is_finite()) {
            return Err(Error::invalid(
                "dt_s",
                "must be positive and finite",
                self.dt_s,
            ));
        }
        let mut prev = f64::NEG_INFINITY;
        for ev in &self.events {
            if !(ev.time_s >= 0.0 && ev.time_s <= self.duration_s) {
                return Err(Error::InvalidScenario(format!(
                    "event at {} s outside the run [0, {}]",
                    ev.time_s, self.duration_s
                )));
            }
            if ev.time_s <= prev {
                return Err(Error::InvalidScenario(format!(
                    "event times must strictly increase ({} after {})",
                    ev.time_s, prev
                )));
            }
            if !(ev.new_value > 0.0 && ev.new_value.is_finite()) {
                return Err(Error::InvalidScenario(format!(
                    "event value {} must be positive",
                    ev.new_value
                )));
            }
            prev = ev.time_s;
        }
        Ok(())
    }
}

/// Control law driving a scenario.
#[derive(Debug, Clone)]
pub enum Controller {
    /// Model-derived sliding-mode law.
    Classic(SmcConfig),
    /// Adaptive law with a learned plant term. Boxed: the controller state
    /// carries the whole network and dwarfs the other variants.
    Dnn(Box<AdaptiveSmcState>),
    /// Constant duty, no feedback.
    OpenLoop(f64),
}

/// One trace sample. Surface, Lyapunov, and learned-term columns apply
/// only to the controllers that define them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub i_l: f64,
    pub v_o: f64,
    pub duty: f64,
    pub s: Option<f64>,
    pub v_lyap: Option<f64>,
    pub f_hat: Option<f64>,
    pub r_load: f64,
    pub v_in: f64,
}

/// Uniformly sampled run record, one row per controller period.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
}

#[derive(Serialize)]
struct CsvRecord {
    t: f64,
    i_l: f64,
    v_o: f64,
    duty: f64,
    s: f64,
    v_lyap: f64,
    f_hat: f64,
    r_load: f64,
    v_in: f64,
}

impl Trace {
    /// Writes the `t,i_l,v_o,duty,s,v_lyap,f_hat,r_load,v_in` CSV; columns
    /// a controller does not produce hold NaN.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        for r in &self.records {
            writer.serialize(CsvRecord {
                t: r.t,
                i_l: r.i_l,
                v_o: r.v_o,
                duty: r.duty,
                s: r.s.unwrap_or(f64::NAN),
                v_lyap: r.v_lyap.unwrap_or(f64::NAN),
                f_hat: r.f_hat.unwrap_or(f64::NAN),
                r_load: r.r_load,
                v_in: r.v_in,
            })?;
        }
        writer.flush()?;
        Ok(())
    }
}

fn apply_event(live: &mut ConverterParams, ev: &Event) {
    match ev.kind {
        EventKind::LoadStep => live.load_resistance = ev.new_value,
        EventKind::VinStep => live.input_voltage = ev.new_value,
    }
}

/// Duty command plus the diagnostic columns the law defines.
struct ControlDecision {
    duty: f64,
    s: Option<f64>,
    v_lyap: Option<f64>,
    f_hat: Option<f64>,
}

/// One controller decision. The law runs on the frozen nominal parameters;
/// only the sensed error state reflects the live circuit.
fn control_step(
    controller: &mut Controller,
    err: ErrorState,
    nominal: &ConverterParams,
    dt: f64,
) -> Result<ControlDecision> {
    match controller {
        Controller::OpenLoop(duty) => {
            if !(0.0..=1.0).contains(duty) {
                return Err(Error::invalid("duty", "must lie in [0, 1]", *duty));
            }
            Ok(ControlDecision {
                duty: *duty,
                s: None,
                v_lyap: None,
                f_hat: None,
            })
        }
        Controller::Classic(cfg) => {
            let s = sliding_surface(err, cfg);
            Ok(ControlDecision {
                duty: smc_duty(err, nominal, cfg),
                s: Some(s),
                v_lyap: Some(lyapunov_value(s)),
                f_hat: None,
            })
        }
        Controller::Dnn(state) => {
            let duty = dnn_smc_duty(err, state, nominal, dt)?;
            Ok(ControlDecision {
                duty,
                s: Some(state.last_s),
                v_lyap: Some(lyapunov_value(state.last_s)),
                f_hat: Some(state.last_f_hat),
            })
        }
    }
}

/// Runs a scenario to completion. Events mutate the live circuit at the
/// first sample at or after their time; the additive disturbance enters
/// the current balance as an equivalent inductor-current slope offset.
pub fn run_scenario(scn: &Scenario, controller: Controller) -> Result<Trace> {
    scn.validate()?;
    if let Controller::Classic(cfg) = &controller {
        cfg.validate()?;
    }
    match scn.model {
        PlantModel::Averaged => run_averaged(scn, controller),
        PlantModel::Switched => run_switched(scn, controller),
    }
}

fn run_averaged(scn: &Scenario, mut controller: Controller) -> Result<Trace> {
    let nominal = scn.params;
    let mut live = scn.params;
    let dt = scn.dt_s;
    let steps = (scn.duration_s / dt).round() as usize;
    let disturbance = scn.additive_disturbance;
    let mut state = PlantState::ZERO;
    let mut next_event = 0;
    let mut records = Vec::with_capacity(steps);
    for k in 0..steps {
        let t = k as f64 * dt;
        while next_event < scn.events.len() && scn.events[next_event].time_s <= t {
            apply_event(&mut live, &scn.events[next_event]);
            next_event += 1;
        }
        let err = error_coordinates(state, &live);
        let ControlDecision {
            duty,
            s,
            v_lyap,
            f_hat,
        } = control_step(&mut controller, err, &nominal, dt)?;
        records.push(TraceRecord {
            t,
            i_l: state.inductor_current,
            v_o: state.output_voltage,
            duty,
            s,
            v_lyap,
            f_hat,
            r_load: live.load_resistance,
            v_in: live.input_voltage,
        });
        let plant = live;
        state = rk4_step(state, t, dt, |tt, st| {
            let mut d = averaged_derivative(st, &plant, duty)?;
            d.di_l -= plant.capacitance * disturbance.value(tt);
            Ok(d)
        })?;
    }
    Ok(Trace { records })
}

const SWITCHED_SUBSTEPS: usize = 100;

/// Advances the state across `span` seconds with the gate held fixed,
/// splitting the span into `steps` Euler substeps.
fn integrate_gated(
    mut state: PlantState,
    t0: f64,
    span: f64,
    steps: usize,
    gate: bool,
    plant: &ConverterParams,
    disturbance: &Disturbance,
) -> Result<PlantState> {
    let dt = span / steps as f64;
    for i in 0..steps {
        let t = t0 + i as f64 * dt;
        state = euler_step(state, t, dt, |tt, st| {
            let mut d = switched_derivative(st, plant, gate);
            d.di_l -= plant.capacitance * disturbance.value(tt);
            Ok(d)
        })?;
    }
    Ok(state)
}

fn run_switched(scn: &Scenario, mut controller: Controller) -> Result<Trace> {
    let nominal = scn.params;
    let mut live = scn.params;
    let period = nominal.switching_period();
    let cycles = (scn.duration_s / period).round() as usize;
    let disturbance = scn.additive_disturbance;
    let mut state = PlantState::ZERO;
    let mut next_event = 0;
    let mut records = Vec::with_capacity(cycles);
    for k in 0..cycles {
        let t = k as f64 * period;
        while next_event < scn.events.len() && scn.events[next_event].time_s <= t {
            apply_event(&mut live, &scn.events[next_event]);
            next_event += 1;
        }
        let err = error_coordinates(state, &live);
        // The duty is latched for the whole switching period.
        let ControlDecision {
            duty,
            s,
            v_lyap,
            f_hat,
        } = control_step(&mut controller, err, &nominal, period)?;
        records.push(TraceRecord {
            t,
            i_l: state.inductor_current,
            v_o: state.output_voltage,
            duty,
            s,
            v_lyap,
            f_hat,
            r_load: live.load_resistance,
            v_in: live.input_voltage,
        });
        // The on and off phases integrate separately so the gate flips at
        // exactly duty * period, not at the nearest substep boundary.
        let plant = live;
        let on_span = duty * period;
        let on_steps = (SWITCHED_SUBSTEPS as f64 * duty).round() as usize;
        if on_span > 0.0 {
            state = integrate_gated(
                state,
                t,
                on_span,
                on_steps.max(1),
                true,
                &plant,
                &disturbance,
            )?;
        }
        let off_span = period - on_span;
        if off_span > 0.0 {
            let off_steps = (SWITCHED_SUBSTEPS - on_steps.min(SWITCHED_SUBSTEPS)).max(1);
            state = integrate_gated(
                state,
                t + on_span,
                off_span,
                off_steps,
                false,
                &plant,
                &disturbance,
            )?;
        }
    }
    Ok(Trace { records })
}

/// Response quantities reduced from one trace. Settling and recovery use a
/// band of 2% of the reference with hold-to-end semantics: the time of the
/// first sample after which the output never leaves the band again. `None`
/// means the trace ended outside the band.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub settling_time_s: Option<f64>,
    pub overshoot_v: f64,
    /// One entry per scenario event, measured from the event time.
    pub recovery_times_s: Vec<Option<f64>>,
    /// Inductor-current recovery per event: entry into a 2% band around
    /// the post-event steady current V_ref/R. Reported alongside the
    /// voltage recovery because step-response prose often means either.
    pub current_recovery_times_s: Vec<Option<f64>>,
    pub ripple_pp_v: f64,
    pub steady_state_error_v: f64,
}

/// Band half-width as a fraction of the reference voltage.
pub const SETTLING_BAND_FRACTION: f64 = 0.02;

/// Final fraction of the trace used for ripple and steady-state error.
pub const STEADY_STATE_WINDOW_FRACTION: f64 = 0.1;

fn hold_to_end_entry(
    records: &[TraceRecord],
    value: impl Fn(&TraceRecord) -> f64,
    target: f64,
    band: f64,
) -> Option<usize> {
    let last_out = records
        .iter()
        .rposition(|r| (value(r) - target).abs() > band);
    match last_out {
        None => Some(0),
        Some(i) if i + 1 < records.len() => Some(i + 1),
        Some(_) => None,
    }
}

/// Reduces a trace to its response metrics under the scenario that
/// produced it.
pub fn compute_metrics(trace: &Trace, scn: &Scenario) -> Result<Metrics> {
    let records = &trace.records;
    if records.is_empty() {
        return Err(Error::EmptyInput("trace"));
    }
    let vref = scn.params.reference_voltage;
    let band = SETTLING_BAND_FRACTION * vref;

    let settling_time_s = hold_to_end_entry(records, |r| r.v_o, vref, band).map(|i| records[i].t);

    let overshoot_v = if scn.events.is_empty() {
        records.iter().map(|r| r.v_o - vref).fold(0.0, f64::max)
    } else {
        let t0 = scn.events[0].time_s;
        records
            .iter()
            .filter(|r| r.t >= t0)
            .map(|r| (r.v_o - vref).abs())
            .fold(0.0, f64::max)
    };

    let mut recovery_times_s = Vec::with_capacity(scn.events.len());
    let mut current_recovery_times_s = Vec::with_capacity(scn.events.len());
    for (i, ev) in scn.events.iter().enumerate() {
        let start = records.partition_point(|r| r.t < ev.time_s);
        let end = match scn.events.get(i + 1) {
            Some(next) => records.partition_point(|r| r.t < next.time_s),
            None => records.len(),
        };
        let window = &records[start..end];
        if window.is_empty() {
            recovery_times_s.push(None);
            current_recovery_times_s.push(None);
            continue;
        }
        recovery_times_s.push(
            hold_to_end_entry(window, |r| r.v_o, vref, band).map(|j| window[j].t - ev.time_s),
        );
        let i_target = vref / window[0].r_load;
        current_recovery_times_s.push(
            hold_to_end_entry(
                window,
                |r| r.i_l,
                i_target,
                SETTLING_BAND_FRACTION * i_target,
            )
            .map(|j| window[j].t - ev.time_s),
        );
    }

    let tail_start =
        records.len() - ((records.len() as f64 * STEADY_STATE_WINDOW_FRACTION) as usize).max(1);
    let tail = &records[tail_start..];
    let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
    for r in tail {
        lo = lo.min(r.v_o);
        hi = hi.max(r.v_o);
        sum += r.v_o;
    }
    Ok(Metrics {
        settling_time_s,
        overshoot_v,
        recovery_times_s,
        current_recovery_times_s,
        ripple_pp_v: hi - lo,
        steady_state_error_v: (sum / tail.len() as f64 - vref).abs(),
    })
}

/// Startup interval excluded from dataset sampling: while the duty is
/// railed the sampled targets reflect open-loop slewing, not the regulated
/// behavior the approximator is meant to learn.
pub const DATASET_STARTUP_EXCLUSION_S: f64 = 2e-4;

/// Runs every scenario under the classic law and collects one training row
/// per sample: tracking error, its rate, and the lumped term of the live
/// circuit. Rows are shuffled with the given seed.
pub fn generate_dataset(scenarios: &[Scenario], cfg: &SmcConfig, seed: u64) -> Result<Dataset> {
    if scenarios.is_empty() {
        return Err(Error::EmptyInput("scenario list"));
    }
    let mut rows = Vec::new();
    for scn in scenarios {
        let trace = run_scenario(scn, Controller::Classic(*cfg))?;
        for r in &trace.records {
            if r.t < DATASET_STARTUP_EXCLUSION_S {
                continue;
            }
            let live = ConverterParams {
                load_resistance: r.r_load,
                input_voltage: r.v_in,
                ..scn.params
            };
            let state = PlantState::new(r.i_l, r.v_o);
            let err = error_coordinates(state, &live);
            rows.push(DataRow {
                e: err.voltage_error,
                edot: err.error_rate,
                f: true_f(state, &live),
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rows.shuffle(&mut rng);
    Dataset::new(rows)
}

/// Operating grid for dataset generation: every load in {2, 5, 10} ohm
/// against every source in {10, 12, 14} V, each run 60 ms at a 10 us
/// sample step with one mid-run load step walking the load set.
pub fn default_dataset_scenarios(base: &ConverterParams) -> Vec<Scenario> {
    let loads = [2.0, 5.0, 10.0];
    let next_load = [5.0, 10.0, 2.0];
    let sources = [10.0, 12.0, 14.0];
    let mut out = Vec::with_capacity(9);
    for (i, &r) in loads.iter().enumerate() {
        for &vin in &sources {
            let params = ConverterParams {
                load_resistance: r,
                input_voltage: vin,
                ..*base
            };
            out.push(Scenario {
                params,
                duration_s: 0.06,
                dt_s: 1e-5,
                model: PlantModel::Averaged,
                events: vec![Event {
                    time_s: 0.03,
                    kind: EventKind::LoadStep,
                    new_value: next_load[i],
                }],
                additive_disturbance: Disturbance::none(),
                seed: out.len() as u64,
            });
        }
    }
    out
}

/// Surface configuration for the adaptive controller in comparisons. The
/// adaptive law carries its own plant-term estimate, which tolerates a
/// steeper surface than the fixed model-derived law. Its switching gain
/// must dominate the worst residual error of the shipped approximator
/// (about 3.4e7 right after a hard load step, where the plant term jumps
/// with the load while the approximator sees only the error signals), or
/// the reaching condition fails transiently after load transients.
pub fn dnn_smc_config() -> SmcConfig {
    SmcConfig {
        surface_slope: 1000.0,
        switching_gain: 4e7,
        ..SmcConfig::default()
    }
}

/// The three comparison experiments: bare startup, a load step from the
/// nominal load to 2 ohm at 30 ms, and a 1 V source step at 30 ms.
pub fn comparison_scenarios(base: &ConverterParams) -> Vec<(&'static str, Scenario)> {
    let mk = |events: Vec<Event>, seed: u64| Scenario {
        params: *base,
        duration_s: 0.06,
        dt_s: 1e-6,
        model: PlantModel::Averaged,
        events,
        additive_disturbance: Disturbance::none(),
        seed,
    };
    vec![
        ("startup", mk(Vec::new(), 1)),
        (
            "load_step",
            mk(
                vec![Event {
                    time_s: 0.03,
                    kind: EventKind::LoadStep,
                    new_value: 2.0,
                }],
                2,
            ),
        ),
        (
            "vin_step",
            mk(
                vec![Event {
                    time_s: 0.03,
                    kind: EventKind::VinStep,
                    new_value: base.input_voltage + 1.0,
                }],
                3,
            ),
        ),
    ]
}

/// One line of the comparison report. Times are reported in milliseconds;
/// an unsettled run shows NaN.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub controller: String,
    pub experiment: String,
    pub settling_ms: f64,
    pub overshoot_v: f64,
    pub recovery_ms: f64,
    pub ripple_pp_v: f64,
    pub ss_error_v: f64,
}

impl ReportRow {
    fn from_metrics(controller: &str, experiment: &str, m: &Metrics) -> Self {
        ReportRow {
            controller: controller.to_string(),
            experiment: experiment.to_string(),
            settling_ms: m.settling_time_s.map_or(f64::NAN, |t| t * 1e3),
            overshoot_v: m.overshoot_v,
            recovery_ms: m
                .recovery_times_s
                .first()
                .map_or(0.0, |r| r.map_or(f64::NAN, |t| t * 1e3)),
            ripple_pp_v: m.ripple_pp_v,
            ss_error_v: m.steady_state_error_v,
        }
    }
}

/// Ratio with the convention that a 0/0 column (both controllers already
/// perfect) counts as parity.
fn metric_ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 && den == 0.0 {
        1.0
    } else {
        num / den
    }
}

fn ratio_row(dnn: &ReportRow, classic: &ReportRow) -> ReportRow {
    ReportRow {
        controller: "dnn_over_classic".to_string(),
        experiment: dnn.experiment.clone(),
        settling_ms: metric_ratio(dnn.settling_ms, classic.settling_ms),
        overshoot_v: metric_ratio(dnn.overshoot_v, classic.overshoot_v),
        recovery_ms: metric_ratio(dnn.recovery_ms, classic.recovery_ms),
        ripple_pp_v: metric_ratio(dnn.ripple_pp_v, classic.ripple_pp_v),
        ss_error_v: metric_ratio(dnn.ss_error_v, classic.ss_error_v),
    }
}

/// Full comparison artifact: the report rows plus every underlying trace,
/// keyed by (controller, experiment).
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub rows: Vec<ReportRow>,
    pub traces: Vec<(String, String, Trace)>,
}

impl ComparisonReport {
    /// Writes the `controller,experiment,...` report CSV.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        for row in &self.rows {
            writer.serialize(row)?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Runs the three experiments under the classic and the adaptive law and
/// tabulates their metrics plus per-experiment adaptive/classic ratios.
pub fn compare_controllers(
    base: &ConverterParams,
    classic_cfg: &SmcConfig,
    model: &TrainedModel,
    dnn_cfg: &SmcConfig,
    gain_gamma: f64,
) -> Result<ComparisonReport> {
    let mut rows = Vec::with_capacity(9);
    let mut ratios = Vec::with_capacity(3);
    let mut traces = Vec::with_capacity(6);
    for (name, scn) in comparison_scenarios(base) {
        let classic_trace = run_scenario(&scn, Controller::Classic(*classic_cfg))?;
        let classic_row =
            ReportRow::from_metrics("classic_smc", name, &compute_metrics(&classic_trace, &scn)?);

        let state = AdaptiveSmcState::new(model.clone(), *dnn_cfg, gain_gamma, 0.0)?;
        let dnn_trace = run_scenario(&scn, Controller::Dnn(Box::new(state)))?;
        let dnn_row = ReportRow::from_metrics("dnn_smc", name, &compute_metrics(&dnn_trace, &scn)?);

        ratios.push(ratio_row(&dnn_row, &classic_row));
        rows.push(classic_row);
        rows.push(dnn_row);
        traces.push(("classic_smc".to_string(), name.to_string(), classic_trace));
        traces.push(("dnn_smc".to_string(), name.to_string(), dnn_trace));
    }
    rows.extend(ratios);
    Ok(ComparisonReport { rows, traces })
}
