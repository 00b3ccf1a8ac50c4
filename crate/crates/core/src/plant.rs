//! Buck converter plant model.
//!
//! Synchronous buck converter with an ideal switch pair feeding an LC output
//! filter loaded by a resistor:
//!
//! ```text
//!   di_L/dt = (S_C * V_in - v_o) / L
//!   dv_o/dt = i_L / C - v_o / (R * C)
//! ```
//!
//! `S_C` is the gate signal (1 = high-side switch on). Replacing `S_C` with
//! the duty ratio `D` gives the cycle-averaged model used by the control
//! design. The regulation problem is expressed in error coordinates
//!
//! ```text
//!   x1 = V_ref - v_o          (voltage error)
//!   x2 = dx1/dt = -dv_o/dt    (error rate, from the capacitor current)
//! ```
//!
//! whose dynamics under the averaged model are
//!
//! ```text
//!   dx1/dt = x2
//!   dx2/dt = -x1/(L*C) - x2/(R*C) + V_ref/(L*C) - (V_in/(L*C)) * D + d
//! ```
//!
//! with `d` an additive lumped disturbance. All quantities are SI.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Electrical parameters of the converter and its regulation target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConverterParams {
    /// Filter inductance (H).
    pub inductance: f64,
    /// Output capacitance (F).
    pub capacitance: f64,
    /// Load resistance (Ω).
    pub load_resistance: f64,
    /// Supply voltage (V).
    pub input_voltage: f64,
    /// Regulation target for the output voltage (V).
    pub reference_voltage: f64,
    /// PWM switching frequency (Hz).
    pub switching_frequency: f64,
}

impl Default for ConverterParams {
    fn default() -> Self {
        ConverterParams {
            inductance: 160e-6,
            capacitance: 200e-6,
            load_resistance: 10.0,
            input_voltage: 12.0,
            reference_voltage: 5.0,
            switching_frequency: 25_000.0,
        }
    }
}

impl ConverterParams {
    /// Validated constructor. A buck stage can only step down, so the
    /// reference must not exceed the input voltage.
    pub fn new(
        inductance: f64,
        capacitance: f64,
        load_resistance: f64,
        input_voltage: f64,
        reference_voltage: f64,
        switching_frequency: f64,
    ) -> Result<Self> {
        let p = ConverterParams {
            inductance,
            capacitance,
            load_resistance,
            input_voltage,
            reference_voltage,
            switching_frequency,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("inductance", self.inductance),
            ("capacitance", self.capacitance),
            ("load_resistance", self.load_resistance),
            ("input_voltage", self.input_voltage),
            ("reference_voltage", self.reference_voltage),
            ("switching_frequency", self.switching_frequency),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(
                    match name {
                        "inductance" => "inductance",
                        "capacitance" => "capacitance",
                        "load_resistance" => "load_resistance",
                        "input_voltage" => "input_voltage",
                        "reference_voltage" => "reference_voltage",
                        _ => "switching_frequency",
                    },
                    "must be finite and positive",
                    value,
                ));
            }
        }
        if self.reference_voltage > self.input_voltage {
            return Err(Error::invalid(
                "reference_voltage",
                "must not exceed input_voltage for a buck stage",
                self.reference_voltage,
            ));
        }
        Ok(())
    }

    /// PWM period T_s (s).
    pub fn switching_period(&self) -> f64 {
        1.0 / self.switching_frequency
    }

    /// Duty ratio that holds the output at the reference in steady state.
    pub fn equilibrium_duty(&self) -> f64 {
        self.reference_voltage / self.input_voltage
    }
}

/// Instantaneous plant state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantState {
    /// Inductor current i_L (A).
    pub inductor_current: f64,
    /// Output (capacitor) voltage v_o (V).
    pub output_voltage: f64,
}

impl PlantState {
    pub const ZERO: PlantState = PlantState {
        inductor_current: 0.0,
        output_voltage: 0.0,
    };

    pub fn new(inductor_current: f64, output_voltage: f64) -> Self {
        PlantState {
            inductor_current,
            output_voltage,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.inductor_current.is_finite() && self.output_voltage.is_finite()
    }

    fn advanced(&self, d: PlantDerivative, dt: f64) -> PlantState {
        PlantState {
            inductor_current: self.inductor_current + d.di_l * dt,
            output_voltage: self.output_voltage + d.dv_o * dt,
        }
    }
}

/// Time derivative of [`PlantState`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantDerivative {
    /// di_L/dt (A/s).
    pub di_l: f64,
    /// dv_o/dt (V/s).
    pub dv_o: f64,
}

/// Regulation error coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorState {
    /// x1 = V_ref - v_o (V).
    pub voltage_error: f64,
    /// x2 = dx1/dt (V/s).
    pub error_rate: f64,
}

/// Shape of the additive disturbance `d` in the error dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisturbanceKind {
    None,
    AdditiveStep,
    AdditiveSine,
}

/// Additive disturbance on the error-rate dynamics (V/s^2). The equivalent
/// physical injection is a current-slope perturbation of -C*d(t) on the
/// inductor equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Disturbance {
    pub kind: DisturbanceKind,
    /// Peak amplitude (V/s^2).
    pub magnitude: f64,
    /// Onset time (s); d(t) = 0 before it.
    pub start_time: f64,
    /// Sine frequency (Hz); ignored by the other kinds.
    pub frequency_hz: f64,
    /// Declared bound T with |d(t)| <= T for all t.
    pub bound: f64,
}

impl Default for Disturbance {
    fn default() -> Self {
        Disturbance {
            kind: DisturbanceKind::None,
            magnitude: 0.0,
            start_time: 0.0,
            frequency_hz: 1000.0,
            bound: 0.0,
        }
    }
}

impl Disturbance {
    pub fn none() -> Self {
        Disturbance::default()
    }

    pub fn step(magnitude: f64, start_time: f64) -> Self {
        Disturbance {
            kind: DisturbanceKind::AdditiveStep,
            magnitude,
            start_time,
            bound: magnitude.abs(),
            ..Disturbance::default()
        }
    }

    pub fn sine(magnitude: f64, frequency_hz: f64, start_time: f64) -> Self {
        Disturbance {
            kind: DisturbanceKind::AdditiveSine,
            magnitude,
            start_time,
            frequency_hz,
            bound: magnitude.abs(),
        }
    }

    /// The declared bound must actually cover the waveform.
    pub fn validate(&self) -> Result<()> {
        if !self.magnitude.is_finite() {
            return Err(Error::invalid(
                "magnitude",
                "must be finite",
                self.magnitude,
            ));
        }
        if self.kind != DisturbanceKind::None && self.bound < self.magnitude.abs() {
            return Err(Error::invalid(
                "bound",
                "must be at least |magnitude|",
                self.bound,
            ));
        }
        if self.kind == DisturbanceKind::AdditiveSine
            && !(self.frequency_hz.is_finite() && self.frequency_hz > 0.0)
        {
            return Err(Error::invalid(
                "frequency_hz",
                "must be positive for a sinusoidal disturbance",
                self.frequency_hz,
            ));
        }
        if !(self.start_time.is_finite() && self.start_time >= 0.0) {
            return Err(Error::invalid(
                "start_time",
                "must be non-negative",
                self.start_time,
            ));
        }
        Ok(())
    }

    /// d(t) in V/s^2.
    pub fn value(&self, t: f64) -> f64 {
        if t < self.start_time {
            return 0.0;
        }
        match self.kind {
            DisturbanceKind::None => 0.0,
            DisturbanceKind::AdditiveStep => self.magnitude,
            DisturbanceKind::AdditiveSine => {
                let phase = 2.0 * std::f64::consts::PI * self.frequency_hz * (t - self.start_time);
                self.magnitude * phase.sin()
            }
        }
    }
}

/// Switched-model state derivative for a given gate level.
pub fn switched_derivative(
    state: PlantState,
    params: &ConverterParams,
    gate: bool,
) -> PlantDerivative {
    let vin = if gate { params.input_voltage } else { 0.0 };
    PlantDerivative {
        di_l: (vin - state.output_voltage) / params.inductance,
        dv_o: state.inductor_current / params.capacitance
            - state.output_voltage / (params.load_resistance * params.capacitance),
    }
}

/// Cycle-averaged state derivative for a duty ratio in [0, 1].
pub fn averaged_derivative(
    state: PlantState,
    params: &ConverterParams,
    duty: f64,
) -> Result<PlantDerivative> {
    if !(0.0..=1.0).contains(&duty) || !duty.is_finite() {
        return Err(Error::invalid("duty", "must lie in [0, 1]", duty));
    }
    Ok(PlantDerivative {
        di_l: (duty * params.input_voltage - state.output_voltage) / params.inductance,
        dv_o: state.inductor_current / params.capacitance
            - state.output_voltage / (params.load_resistance * params.capacitance),
    })
}

/// Error coordinates of a plant state. The error rate is derived from the
/// capacitor current, x2 = -(i_L - v_o/R)/C, so it is exact within the model;
/// `params` must be the live plant parameters (capacitor-current sensing).
pub fn error_coordinates(state: PlantState, params: &ConverterParams) -> ErrorState {
    let dv_o = state.inductor_current / params.capacitance
        - state.output_voltage / (params.load_resistance * params.capacitance);
    ErrorState {
        voltage_error: params.reference_voltage - state.output_voltage,
        error_rate: -dv_o,
    }
}

/// Error dynamics under the averaged model with an additive disturbance on
/// the error rate. Returns (dx1/dt, dx2/dt).
pub fn error_dynamics(
    err: ErrorState,
    params: &ConverterParams,
    duty: f64,
    disturbance: f64,
) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&duty) || !duty.is_finite() {
        return Err(Error::invalid("duty", "must lie in [0, 1]", duty));
    }
    let lc = params.inductance * params.capacitance;
    let rc = params.load_resistance * params.capacitance;
    let dx1 = err.error_rate;
    let dx2 = -err.voltage_error / lc - err.error_rate / rc + params.reference_voltage / lc
        - params.input_voltage / lc * duty
        + disturbance;
    Ok((dx1, dx2))
}

/// PWM comparator: gate is high while the position within the switching
/// period is below the duty fraction. The caller latches `duty` once per
/// period; this function only compares.
pub fn pwm_gate(time_in_period: f64, duty: f64, params: &ConverterParams) -> bool {
    let period = params.switching_period();
    let phase = (time_in_period.rem_euclid(period)) / period;
    phase < duty
}

/// One classical fourth-order Runge-Kutta step of size `dt` starting at time
/// `t`. The derivative closure may depend on time (disturbances) but must be
/// pure over the step; control inputs are held constant by the caller.
pub fn rk4_step<F>(state: PlantState, t: f64, dt: f64, f: F) -> Result<PlantState>
where
    F: Fn(f64, PlantState) -> Result<PlantDerivative>,
{
    let half = 0.5 * dt;
    let k1 = f(t, state)?;
    let k2 = f(t + half, state.advanced(k1, half))?;
    let k3 = f(t + half, state.advanced(k2, half))?;
    let k4 = f(t + dt, state.advanced(k3, dt))?;
    let next = PlantState {
        inductor_current: state.inductor_current
            + dt / 6.0 * (k1.di_l + 2.0 * k2.di_l + 2.0 * k3.di_l + k4.di_l),
        output_voltage: state.output_voltage
            + dt / 6.0 * (k1.dv_o + 2.0 * k2.dv_o + 2.0 * k3.dv_o + k4.dv_o),
    };
    if !next.is_finite() {
        return Err(Error::NonFinite {
            what: "plant state",
            time: t,
        });
    }
    Ok(next)
}

/// One forward-Euler step of size `dt`, used for the sub-period integration
/// of the switched model where the gate is piecewise constant.
pub fn euler_step<F>(state: PlantState, t: f64, dt: f64, f: F) -> Result<PlantState>
where
    F: Fn(f64, PlantState) -> Result<PlantDerivative>,
{
    let next = state.advanced(f(t, state)?, dt);
    if !next.is_finite() {
        return Err(Error::NonFinite {
            what: "plant state",
            time: t,
        });
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params() -> ConverterParams {
        ConverterParams::default()
    }

    #[test]
    fn switched_derivative_matches_hand_values() {
        let p = params();
        // Gate high from rest: di/dt = V_in/L = 12/160e-6.
        let d = switched_derivative(PlantState::ZERO, &p, true);
        assert_relative_eq!(d.di_l, 75_000.0, max_relative = 1e-12);
        assert_relative_eq!(d.dv_o, 0.0);

        // Gate low at the nominal operating point: the inductor discharges
        // into the output, and the capacitor current is exactly zero.
        let d = switched_derivative(PlantState::new(0.5, 5.0), &p, false);
        assert_relative_eq!(d.di_l, -31_250.0, max_relative = 1e-12);
        assert_relative_eq!(d.dv_o, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn averaged_derivative_is_zero_at_equilibrium() {
        let p = params();
        let d = averaged_derivative(PlantState::new(0.5, 5.0), &p, 5.0 / 12.0).unwrap();
        assert_relative_eq!(d.di_l, 0.0, epsilon = 1e-9);
        assert_relative_eq!(d.dv_o, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn averaged_derivative_rejects_bad_duty() {
        let p = params();
        assert!(averaged_derivative(PlantState::ZERO, &p, -0.01).is_err());
        assert!(averaged_derivative(PlantState::ZERO, &p, 1.01).is_err());
        assert!(averaged_derivative(PlantState::ZERO, &p, f64::NAN).is_err());
    }

    #[test]
    fn error_coordinates_hand_values() {
        let p = params();
        let e = error_coordinates(PlantState::new(0.5, 5.0), &p);
        assert_relative_eq!(e.voltage_error, 0.0);
        assert_relative_eq!(e.error_rate, 0.0, epsilon = 1e-12);

        let e = error_coordinates(PlantState::ZERO, &p);
        assert_relative_eq!(e.voltage_error, 5.0);
        assert_relative_eq!(e.error_rate, 0.0);

        // 1 A into a 5 V output: capacitor takes 0.5 A, x2 = -0.5/C.
        let e = error_coordinates(PlantState::new(1.0, 5.0), &p);
        assert_relative_eq!(e.voltage_error, 0.0);
        assert_relative_eq!(e.error_rate, -2500.0, max_relative = 1e-12);
    }

    #[test]
    fn error_dynamics_hand_values() {
        let p = params();
        let origin = ErrorState {
            voltage_error: 0.0,
            error_rate: 0.0,
        };
        // Equilibrium duty exactly cancels the reference term.
        let (dx1, dx2) = error_dynamics(origin, &p, p.equilibrium_duty(), 0.0).unwrap();
        assert_relative_eq!(dx1, 0.0);
        assert_relative_eq!(dx2, 0.0, epsilon = 1e-6);

        // Zero duty at the origin leaves only V_ref/(L*C).
        let (_, dx2) = error_dynamics(origin, &p, 0.0, 0.0).unwrap();
        assert_relative_eq!(dx2, 156_250_000.0, max_relative = 1e-12);

        // The disturbance enters additively.
        let (_, dx2_d) = error_dynamics(origin, &p, 0.0, 1234.5).unwrap();
        assert_relative_eq!(dx2_d - dx2, 1234.5, max_relative = 1e-9);
    }

    #[test]
    fn pwm_gate_levels() {
        let p = params();
        for phase in [0.0, 0.3, 0.9999] {
            let t = phase * p.switching_period();
            assert!(pwm_gate(t, 1.0, &p));
            assert!(!pwm_gate(t, 0.0, &p));
        }
        let t_quarter = 0.25 * p.switching_period();
        let t_three_quarters = 0.75 * p.switching_period();
        assert!(pwm_gate(t_quarter, 0.5, &p));
        assert!(!pwm_gate(t_three_quarters, 0.5, &p));
    }

    #[test]
    fn pwm_mean_matches_duty_within_quantum() {
        let p = params();
        let n = 100usize;
        let sub = p.switching_period() / n as f64;
        for duty in [0.0, 0.125, 0.37, 0.375, 0.5, 0.83, 1.0] {
            let high = (0..n)
                .filter(|k| pwm_gate(*k as f64 * sub, duty, &p))
                .count();
            let mean = high as f64 / n as f64;
            assert!(
                (mean - duty).abs() <= 1.0 / n as f64 + 1e-12,
                "duty {duty}: mean {mean}"
            );
        }
    }

    #[test]
    fn rk4_single_step_matches_exponential() {
        // dx/dt = -x on the voltage component, x(0) = 1, dt = 1e-3.
        let state = PlantState::new(0.0, 1.0);
        let next = rk4_step(state, 0.0, 1e-3, |_, s| {
            Ok(PlantDerivative {
                di_l: 0.0,
                dv_o: -s.output_voltage,
            })
        })
        .unwrap();
        assert!((next.output_voltage - 0.999_000_5).abs() < 1e-9);
        assert!((next.output_voltage - (-1e-3f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn rk4_global_error_is_fourth_order() {
        // Integrate dx/dt = -x over 0.1 s; halving dt must cut the global
        // error by about 2^4.
        let run = |dt: f64| -> f64 {
            let mut s = PlantState::new(0.0, 1.0);
            let steps = (0.1 / dt).round() as usize;
            for k in 0..steps {
                s = rk4_step(s, k as f64 * dt, dt, |_, s| {
                    Ok(PlantDerivative {
                        di_l: 0.0,
                        dv_o: -s.output_voltage,
                    })
                })
                .unwrap();
            }
            (s.output_voltage - (-0.1f64).exp()).abs()
        };
        let ratio = run(2e-3) / run(1e-3);
        assert!(
            (14.0..=18.0).contains(&ratio),
            "error ratio {ratio} not fourth order"
        );
    }

    #[test]
    fn euler_step_is_first_order_exact_for_constant_slope() {
        let s = PlantState::new(1.0, 2.0);
        let next = euler_step(s, 0.0, 0.5, |_, _| {
            Ok(PlantDerivative {
                di_l: 2.0,
                dv_o: -4.0,
            })
        })
        .unwrap();
        assert_relative_eq!(next.inductor_current, 2.0);
        assert_relative_eq!(next.output_voltage, 0.0);
    }

    #[test]
    fn integration_flags_non_finite_states() {
        let s = PlantState::new(1.0, 1.0);
        let err = rk4_step(s, 0.25, 1e-3, |_, _| {
            Ok(PlantDerivative {
                di_l: f64::INFINITY,
                dv_o: 0.0,
            })
        })
        .unwrap_err();
        match err {
            Error::NonFinite { time, .. } => assert_relative_eq!(time, 0.25),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn averaged_model_settles_to_equilibrium() {
        // Constant duty from rest: the state must converge to
        // (D*V_in/R, D*V_in). The transient envelope decays at 1/(2*R*C),
        // so 50 ms is about 12.5 time constants.
        let p = params();
        let duty = 5.0 / 12.0;
        let dt = 1e-6;
        let mut s = PlantState::ZERO;
        for k in 0..50_000 {
            s = rk4_step(s, k as f64 * dt, dt, |_, s| {
                averaged_derivative(s, &p, duty)
            })
            .unwrap();
        }
        let v_target = duty * p.input_voltage;
        let i_target = v_target / p.load_resistance;
        assert!((s.output_voltage - v_target).abs() / v_target < 1e-3);
        assert!((s.inductor_current - i_target).abs() / i_target < 1e-3);
    }

    #[test]
    fn switched_and_averaged_models_agree_per_cycle() {
        // Fixed duty, no controller: per-cycle means of the switched model
        // must track the averaged model within 1% of V_ref once the start-up
        // ring has decayed.
        let p = params();
        let duty = 5.0 / 12.0;
        let period = p.switching_period();
        let substeps = 100usize;
        let sub = period / substeps as f64;

        let mut avg = PlantState::ZERO;
        let mut sw = PlantState::ZERO;
        let cycles = 1250; // 50 ms
        let mut worst = 0.0f64;
        for cycle in 0..cycles {
            let mut cycle_sum = 0.0;
            for k in 0..substeps {
                let t = (cycle * substeps + k) as f64 * sub;
                let gate = pwm_gate(t.rem_euclid(period), duty, &p);
                sw = euler_step(sw, t, sub, |_, s| Ok(switched_derivative(s, &p, gate))).unwrap();
                cycle_sum += sw.output_voltage;
            }
            let t0 = cycle as f64 * period;
            avg = rk4_step(avg, t0, period, |_, s| averaged_derivative(s, &p, duty)).unwrap();
            if cycle > cycles / 2 {
                worst = worst.max((cycle_sum / substeps as f64 - avg.output_voltage).abs());
            }
        }
        assert!(
            worst < 0.01 * p.reference_voltage,
            "per-cycle disagreement {worst} V"
        );
    }

    #[test]
    fn disturbance_waveforms() {
        let none = Disturbance::none();
        assert_eq!(none.value(1.0), 0.0);

        let step = Disturbance::step(2.5e6, 0.01);
        assert_eq!(step.value(0.0099), 0.0);
        assert_eq!(step.value(0.01), 2.5e6);
        step.validate().unwrap();

        let sine = Disturbance::sine(1e6, 1000.0, 0.0);
        assert_relative_eq!(sine.value(0.25e-3), 1e6, max_relative = 1e-9);
        assert!(sine.value(10.0).abs() <= sine.bound + 1e-9);
        sine.validate().unwrap();

        let bad = Disturbance {
            bound: 0.5e6,
            ..Disturbance::step(1e6, 0.0)
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn params_validation() {
        assert!(ConverterParams::new(160e-6, 200e-6, 10.0, 12.0, 5.0, 25e3).is_ok());
        assert!(ConverterParams::new(0.0, 200e-6, 10.0, 12.0, 5.0, 25e3).is_err());
        assert!(ConverterParams::new(160e-6, 200e-6, 10.0, 12.0, 13.0, 25e3).is_err());
        assert!(ConverterParams::new(160e-6, -1.0, 10.0, 12.0, 5.0, 25e3).is_err());
    }

    proptest! {
        /// The error dynamics are an exact change of coordinates of the
        /// averaged model: both routes to (dx1, dx2) agree.
        #[test]
        fn error_dynamics_consistent_with_averaged_model(
            i_l in -5.0f64..5.0,
            v_o in -5.0f64..15.0,
            duty in 0.0f64..1.0,
        ) {
            let p = params();
            let state = PlantState::new(i_l, v_o);
            let err = error_coordinates(state, &p);
            let (dx1, dx2) = error_dynamics(err, &p, duty, 0.0).unwrap();

            let pd = averaged_derivative(state, &p, duty).unwrap();
            // v̈_o follows from differentiating the capacitor equation.
            let dv2 = (pd.di_l - pd.dv_o / p.load_resistance) / p.capacitance;
            prop_assert!((dx1 - (-pd.dv_o)).abs() <= 1e-9 * dx1.abs().max(1.0));
            prop_assert!((dx2 - (-dv2)).abs() <= 1e-9 * dx2.abs().max(1.0));
        }

        /// The PWM comparator emits exactly the commanded duty fraction over
        /// a period grid, up to one sub-step quantum.
        #[test]
        fn pwm_mean_equals_duty(duty in 0.0f64..=1.0) {
            let p = params();
            let n = 100usize;
            let sub = p.switching_period() / n as f64;
            let high = (0..n).filter(|k| pwm_gate(*k as f64 * sub, duty, &p)).count();
            prop_assert!((high as f64 / n as f64 - duty).abs() <= 1.0 / n as f64 + 1e-12);
        }
    }
}
