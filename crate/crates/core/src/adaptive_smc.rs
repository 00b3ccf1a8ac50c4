//! Adaptive sliding-mode controller that replaces the model-derived plant
//! term with a learned approximation.
//!
//! The classic controller cancels the lumped plant term
//! f(x) = v_o/(L*C) + vdot_o/(R*C) using nominal parameters. Here a frozen
//! trained network supplies the feature basis sigma(x) and an online head
//! approximates f as f_hat = W^T sigma(x) + offset, updated by the law
//! dW/dt = gamma * s * sigma(x). The duty command is
//!
//!   duty = clamp( (L*C/V_in) * [c*x2 + f_hat + eta*sw(s)], 0, 1 )
//!
//! which reduces exactly to the classic law when f_hat equals f. The update
//! law is derived from the composite candidate V = s^2/2 + |W~|^2/(2*gamma),
//! whose cross terms cancel so that dV/dt = -eta*s*sw(s) <= 0 while the
//! command is unsaturated. Adaptation therefore freezes whenever the duty
//! clamps, where that cancellation does not hold.

use crate::error::{Error, Result};
use crate::neural::{Activation, AdaptiveHead, Mlp, Standardization, TrainedModel};
use crate::plant::{ConverterParams, ErrorState, PlantState};
use crate::smc::{lyapunov_value, sliding_surface, switching_function, SmcConfig};

/// Default adaptation gain for the converter-scale loop. The learned term
/// is of order 1e8 and the surface excursions of order 1e4, so useful
/// corrections within a few milliseconds need a gain far above unity.
pub const DEFAULT_ADAPTATION_GAIN: f64 = 1e5;

/// Mutable controller state: the adapting head, the frozen feature model,
/// the surface configuration, and per-step diagnostics.
#[derive(Debug, Clone)]
pub struct AdaptiveSmcState {
    pub head: AdaptiveHead,
    pub smc: SmcConfig,
    pub model: TrainedModel,
    /// Surface value at the most recent step.
    pub last_s: f64,
    /// Learned term at the most recent step.
    pub last_f_hat: f64,
    /// Unclamped duty at the most recent step; outside [0,1] means the
    /// command saturated and adaptation was frozen.
    pub last_raw_duty: f64,
    /// Elapsed controller time, advanced by dt on every step.
    pub time: f64,
    /// One (t, V) sample per step. V is the composite value when
    /// `reference_weights` is set (and gamma > 0), otherwise s^2/2.
    pub lyapunov_history: Vec<(f64, f64)>,
    /// Oracle weights W* for representability studies; enables the
    /// composite Lyapunov recording.
    pub reference_weights: Option<Vec<f64>>,
}

impl AdaptiveSmcState {
    /// Builds the controller around a trained model. The head starts at the
    /// model's own output layer rescaled to physical units.
    pub fn new(
        model: TrainedModel,
        smc: SmcConfig,
        gain_gamma: f64,
        approx_error_bound: f64,
    ) -> Result<Self> {
        smc.validate()?;
        model.net.validate()?;
        let head = model.head(gain_gamma, approx_error_bound)?;
        let width = model.net.layer_sizes[model.net.layer_sizes.len() - 2];
        if head.weights.len() != width {
            return Err(Error::DimensionMismatch {
                context: "adaptive head width",
                expected: width,
                got: head.weights.len(),
            });
        }
        Ok(AdaptiveSmcState {
            head,
            smc,
            model,
            last_s: 0.0,
            last_f_hat: 0.0,
            last_raw_duty: 0.0,
            time: 0.0,
            lyapunov_history: Vec::new(),
            reference_weights: None,
        })
    }

    /// Replaces the head, keeping its width consistent with the model.
    pub fn with_head(mut self, head: AdaptiveHead) -> Result<Self> {
        if head.weights.len() != self.head.weights.len() {
            return Err(Error::DimensionMismatch {
                context: "adaptive head width",
                expected: self.head.weights.len(),
                got: head.weights.len(),
            });
        }
        self.head = head;
        Ok(self)
    }

    /// Supplies the oracle weights that make the composite Lyapunov value
    /// computable along the run.
    pub fn with_reference_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.head.weights.len() {
            return Err(Error::DimensionMismatch {
                context: "reference weights",
                expected: self.head.weights.len(),
                got: weights.len(),
            });
        }
        self.reference_weights = Some(weights);
        Ok(self)
    }

    fn lyapunov_sample(&self, s: f64) -> f64 {
        match (&self.reference_weights, self.head.gain_gamma > 0.0) {
            (Some(w_star), true) => {
                let w_tilde: Vec<f64> = self
                    .head
                    .weights
                    .iter()
                    .zip(w_star)
                    .map(|(w, r)| w - r)
                    .collect();
                composite_lyapunov(s, &w_tilde, self.head.gain_gamma)
                    .expect("gamma checked positive")
            }
            _ => lyapunov_value(s),
        }
    }
}

/// One adaptive controller step: computes the duty for the current error
/// state and, if the command is unsaturated, advances the head by one
/// adaptation step over `dt`.
pub fn dnn_smc_duty(
    err: ErrorState,
    state: &mut AdaptiveSmcState,
    params: &ConverterParams,
    dt: f64,
) -> Result<f64> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("dt", "must be positive and finite", dt));
    }
    let s = sliding_surface(err, &state.smc);
    let sigma = state
        .model
        .hidden_features(err.voltage_error, err.error_rate)?;
    let f_hat = state.head.f_hat(&sigma)?;
    let gain = params.inductance * params.capacitance / params.input_voltage;
    let raw = gain
        * (state.smc.surface_slope * err.error_rate
            + f_hat
            + state.smc.switching_gain * switching_function(s, state.smc.boundary_layer));
    if !raw.is_finite() {
        return Err(Error::NonFiniteValue("adaptive duty"));
    }
    state
        .lyapunov_history
        .push((state.time, state.lyapunov_sample(s)));
    let saturated = !(0.0..=1.0).contains(&raw);
    if !saturated {
        state.head.adapt(s, &sigma, dt)?;
    }
    state.last_s = s;
    state.last_f_hat = f_hat;
    state.last_raw_duty = raw;
    state.time += dt;
    Ok(raw.clamp(0.0, 1.0))
}

/// Lumped plant term f(x) = v_o/(L*C) + vdot_o/(R*C), the quantity the
/// network learns. Doubles as the dataset target and as the oracle for the
/// approximation error f - f_hat.
pub fn true_f(state: PlantState, params: &ConverterParams) -> f64 {
    let vdot = (state.inductor_current - state.output_voltage / params.load_resistance)
        / params.capacitance;
    state.output_voltage / (params.inductance * params.capacitance)
        + vdot / (params.load_resistance * params.capacitance)
}

/// Composite Lyapunov value V = s^2/2 + |w_tilde|^2 / (2*gamma), where
/// w_tilde is the head's deviation from the representability oracle W*.
pub fn composite_lyapunov(s: f64, w_tilde: &[f64], gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid(
            "gamma",
            "must be positive and finite",
            gamma,
        ));
    }
    let w2: f64 = w_tilde.iter().map(|w| w * w).sum();
    Ok(0.5 * s * s + w2 / (2.0 * gamma))
}

/// Pre-activation offset keeping every rectifier unit of the constructed
/// feature basis active; the basis is exact while |x1| and |x2| stay below
/// this value.
pub const AFFINE_BASIS_OFFSET: f64 = 2e4;

/// Builds a hand-constructed model whose feature basis represents the
/// averaged converter's lumped term exactly, together with the oracle
/// weights W* such that true_f = W*^T sigma(x) everywhere inside the
/// basis's active domain. The first layer passes (x1 + B, x2 + B, 1)
/// through always-active rectifiers, the second layer is the identity, and
/// the output row is W* itself, so the untouched head starts at the oracle.
pub fn representable_model(params: &ConverterParams) -> Result<(TrainedModel, Vec<f64>)> {
    params.validate()?;
    let b = AFFINE_BASIS_OFFSET;
    let lc = params.inductance * params.capacitance;
    let rc = params.load_resistance * params.capacitance;
    // true_f in error coordinates: V_ref/(L*C) - x1/(L*C) - x2/(R*C).
    let w_star = vec![
        -1.0 / lc,
        -1.0 / rc,
        params.reference_voltage / lc + b / lc + b / rc,
    ];
    let net = Mlp {
        layer_sizes: vec![2, 3, 3, 1],
        activation: Activation::Relu,
        weights: vec![
            vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]],
            vec![
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
            ],
            vec![w_star.clone()],
        ],
        biases: vec![vec![b, b, 1.0], vec![0.0, 0.0, 0.0], vec![0.0]],
    };
    net.validate()?;
    let stats = Standardization {
        input_mean: vec![0.0, 0.0],
        input_std: vec![1.0, 1.0],
        target_mean: 0.0,
        target_std: 1.0,
    };
    Ok((
        TrainedModel {
            net,
            stats,
            seed: 0,
        },
        w_star,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::{averaged_derivative, error_coordinates, rk4_step};
    use crate::smc::smc_duty;
    use approx::assert_relative_eq;

    fn params() -> ConverterParams {
        ConverterParams::default()
    }

    #[test]
    fn true_f_hand_values() {
        let p = params();
        assert_eq!(true_f(PlantState::ZERO, &p), 0.0);
        // Equilibrium: vdot_o = 0, so f = v_o/(L*C).
        assert_relative_eq!(true_f(PlantState::new(0.5, 5.0), &p), 156_250_000.0);
        // Extra 0.5 A charges the capacitor at 2500 V/s.
        assert_relative_eq!(
            true_f(PlantState::new(1.0, 5.0), &p),
            156_250_000.0 + 1_250_000.0
        );
    }

    #[test]
    fn true_f_matches_error_coordinate_form() {
        // f can be written V_ref/(L*C) - x1/(L*C) - x2/(R*C); both routes
        // must agree, which pins the representable basis construction.
        let p = params();
        let lc = p.inductance * p.capacitance;
        let rc = p.load_resistance * p.capacitance;
        for &(i, v) in &[(0.2, 1.0), (0.8, 4.0), (2.5, 5.5), (0.0, 0.0)] {
            let st = PlantState::new(i, v);
            let err = error_coordinates(st, &p);
            let via_err = p.reference_voltage / lc - err.voltage_error / lc - err.error_rate / rc;
            assert_relative_eq!(true_f(st, &p), via_err, max_relative = 1e-12);
        }
    }

    #[test]
    fn composite_lyapunov_hand_values() {
        assert_eq!(composite_lyapunov(0.0, &[0.0, 0.0, 0.0], 1.0).unwrap(), 0.0);
        assert_relative_eq!(composite_lyapunov(1.0, &[0.0], 123.0).unwrap(), 0.5);
        assert_relative_eq!(composite_lyapunov(0.0, &[2.0, 0.0, 0.0], 2.0).unwrap(), 1.0);
        assert!(composite_lyapunov(1.0, &[1.0], 0.0).is_err());
        assert!(composite_lyapunov(1.0, &[1.0], -1.0).is_err());
    }

    #[test]
    fn representable_basis_is_exact() {
        let p = params();
        let (model, w_star) = representable_model(&p).unwrap();
        for &(i, v) in &[(0.0, 0.0), (0.5, 5.0), (1.5, 3.0), (-0.5, 7.0)] {
            let st = PlantState::new(i, v);
            let err = error_coordinates(st, &p);
            let sigma = model
                .hidden_features(err.voltage_error, err.error_rate)
                .unwrap();
            let f_hat: f64 = w_star.iter().zip(&sigma).map(|(w, s)| w * s).sum();
            let f = true_f(st, &p);
            assert_relative_eq!(f_hat, f, max_relative = 1e-9, epsilon = 1e-3);
        }
    }

    #[test]
    fn duty_at_origin_is_equilibrium_ratio() {
        // With f_hat equal to the true plant term at the origin and s = 0,
        // the command is V_ref/V_in, the equilibrium duty.
        let p = params();
        let (model, _) = representable_model(&p).unwrap();
        let mut state = AdaptiveSmcState::new(model, SmcConfig::default(), 0.0, 0.0).unwrap();
        let duty = dnn_smc_duty(
            ErrorState {
                voltage_error: 0.0,
                error_rate: 0.0,
            },
            &mut state,
            &p,
            1e-6,
        )
        .unwrap();
        assert_relative_eq!(duty, 5.0 / 12.0, max_relative = 1e-9);
        assert_relative_eq!(state.last_f_hat, 156_250_000.0, max_relative = 1e-9);
    }

    #[test]
    fn duty_zero_without_gain_learned_term_or_rate() {
        let p = params();
        let (model, _) = representable_model(&p).unwrap();
        let zero_head = AdaptiveHead::new(vec![0.0, 0.0, 0.0], 0.0, 0.0, 0.0).unwrap();
        let cfg = SmcConfig {
            switching_gain: 1e-300,
            ..SmcConfig::default()
        };
        let mut state = AdaptiveSmcState::new(model, cfg, 0.0, 0.0)
            .unwrap()
            .with_head(zero_head)
            .unwrap();
        let duty = dnn_smc_duty(
            ErrorState {
                voltage_error: 3.0,
                error_rate: 0.0,
            },
            &mut state,
            &p,
            1e-6,
        )
        .unwrap();
        assert_relative_eq!(duty, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn saturation_clamps_and_freezes_adaptation() {
        let p = params();
        let (model, _) = representable_model(&p).unwrap();
        // Offset forcing the bracket to 2.3 times the input gain.
        let lc = p.inductance * p.capacitance;
        let big =
            AdaptiveHead::new(vec![0.0, 0.0, 0.0], 2.3 * p.input_voltage / lc, 1.0, 0.0).unwrap();
        let cfg = SmcConfig {
            switching_gain: 1e-300,
            ..SmcConfig::default()
        };
        let mut state = AdaptiveSmcState::new(model, cfg, 1.0, 0.0)
            .unwrap()
            .with_head(big)
            .unwrap();
        let err = ErrorState {
            voltage_error: 1.0,
            error_rate: 0.0,
        };
        let before = state.head.weights.clone();
        for _ in 0..5 {
            let duty = dnn_smc_duty(err, &mut state, &p, 1e-6).unwrap();
            assert_eq!(duty, 1.0);
            assert!(state.last_raw_duty > 1.0);
        }
        // Saturated the whole time: the head never moved a bit.
        assert_eq!(state.head.weights, before);

        // Once unsaturated, adaptation resumes.
        let mild = AdaptiveHead::new(vec![0.0, 0.0, 0.0], 156_250_000.0, 1.0, 0.0).unwrap();
        let mut state = state.with_head(mild).unwrap();
        let duty = dnn_smc_duty(err, &mut state, &p, 1e-6).unwrap();
        assert!(duty > 0.0 && duty < 1.0);
        assert!(state.head.weights.iter().any(|&w| w != 0.0));
    }

    /// Closed loop on the averaged plant: the controller step runs once per
    /// dt and the duty is held across the integration step.
    fn run_adaptive_loop(
        state: &mut AdaptiveSmcState,
        params: &ConverterParams,
        start: PlantState,
        dt: f64,
        steps: usize,
    ) -> Vec<(f64, PlantState, f64)> {
        let mut plant = start;
        let mut out = Vec::with_capacity(steps);
        for k in 0..steps {
            let t = k as f64 * dt;
            let err = error_coordinates(plant, params);
            let duty = dnn_smc_duty(err, state, params, dt).unwrap();
            out.push((t, plant, duty));
            plant = rk4_step(plant, t, dt, |_, st| averaged_derivative(st, params, duty)).unwrap();
        }
        out
    }

    #[test]
    fn reduces_to_classic_smc_when_the_head_is_exact() {
        // Frozen head at the oracle weights makes f_hat identical to the
        // model-derived term, so both laws must issue the same duty along
        // an entire startup trace.
        let p = params();
        let (model, _) = representable_model(&p).unwrap();
        let cfg = SmcConfig::default();
        let mut state = AdaptiveSmcState::new(model, cfg, 0.0, 0.0).unwrap();
        let mut plant = PlantState::ZERO;
        let dt = 1e-6;
        for k in 0..5_000 {
            let t = k as f64 * dt;
            let err = error_coordinates(plant, &p);
            let classic = smc_duty(err, &p, &cfg);
            let adaptive = dnn_smc_duty(err, &mut state, &p, dt).unwrap();
            assert!(
                (classic - adaptive).abs() < 1e-9,
                "duty diverged at t = {t}: {classic} vs {adaptive}"
            );
            plant = rk4_step(plant, t, dt, |_, st| averaged_derivative(st, &p, adaptive)).unwrap();
        }
    }

    #[test]
    fn composite_lyapunov_never_increases_when_f_is_representable() {
        // Representable term, zero approximation error, zero disturbance,
        // boundary-layer switching to keep the command continuous. The
        // composite value must not grow by more than one part in 1e6 on any
        // step, while genuinely decaying overall and crossing both the
        // reaching and the in-layer regimes.
        let p = params();
        let (model, w_star) = representable_model(&p).unwrap();
        let gamma = 5e-3;
        let cfg = SmcConfig {
            surface_slope: 500.0,
            switching_gain: 2e5,
            boundary_layer: 100.0,
            disturbance_bound: 0.0,
        };
        let mut head = model.head(gamma, 0.0).unwrap();
        head.weights[0] += 12.0;
        head.weights[1] += 12.0;
        let mut state = AdaptiveSmcState::new(model, cfg, gamma, 0.0)
            .unwrap()
            .with_head(head)
            .unwrap()
            .with_reference_weights(w_star)
            .unwrap();

        let dt = 1e-7;
        let trace = run_adaptive_loop(&mut state, &p, PlantState::new(0.45, 4.5), dt, 100_000);
        // Premise guard: the command never saturated.
        assert!(trace.iter().all(|&(_, _, d)| d > 0.0 && d < 1.0));

        let hist = &state.lyapunov_history;
        assert_eq!(hist.len(), 100_000);
        let v0 = hist[0].1;
        assert!(hist[0].1 > 0.0);
        for w in hist.windows(2) {
            let (t, prev) = w[0];
            let next = w[1].1;
            assert!(
                next <= prev * (1.0 + 1e-6),
                "composite value rose at t = {t}: {prev} -> {next}"
            );
        }
        let v_end = hist.last().unwrap().1;
        assert!(v_end < 0.5 * v0, "no real descent: {v0} -> {v_end}");
        // The run exercised the reaching regime too.
        assert!(hist[0].1 > 0.5 * cfg.boundary_layer * cfg.boundary_layer);
    }

    #[test]
    fn adapt_step_descends_the_prediction_error_when_signs_agree() {
        // The adaptation law steps the head along s * sigma. When s and the
        // approximation error f - f_hat share their sign, that is the
        // descent direction of (f - f_hat)^2 restricted to span(sigma), so
        // a small step must strictly shrink the error.
        let p = params();
        let (model, w_star) = representable_model(&p).unwrap();
        let st = PlantState::new(0.4, 4.0);
        let err = error_coordinates(st, &p);
        let sigma = model
            .hidden_features(err.voltage_error, err.error_rate)
            .unwrap();
        let f = true_f(st, &p);

        // Head low by construction: f_tilde = f - f_hat > 0, paired with
        // s > 0.
        let mut low = Vec::from(&w_star[..]);
        low[2] -= 2e4;
        let mut head = AdaptiveHead::new(low, 0.0, 1e-3, 0.0).unwrap();
        let before = (f - head.f_hat(&sigma).unwrap()).abs();
        let s = 10.0;
        head.adapt(s, &sigma, 1e-6).unwrap();
        let after = (f - head.f_hat(&sigma).unwrap()).abs();
        assert!(
            after < before,
            "prediction error did not shrink: {before} -> {after}"
        );

        // Mirror case: estimate high, s < 0.
        let mut hi = Vec::from(&w_star[..]);
        hi[2] += 2e4;
        let mut head = AdaptiveHead::new(hi, 0.0, 1e-3, 0.0).unwrap();
        let before = (f - head.f_hat(&sigma).unwrap()).abs();
        head.adapt(-s, &sigma, 1e-6).unwrap();
        let after = (f - head.f_hat(&sigma).unwrap()).abs();
        assert!(after < before);
    }

    #[test]
    fn non_finite_adaptation_is_reported() {
        let p = params();
        let (model, _) = representable_model(&p).unwrap();
        let head = AdaptiveHead::new(vec![1e308, 0.0, 0.0], 0.0, 1e308, 0.0).unwrap();
        let mut state = AdaptiveSmcState::new(model, SmcConfig::default(), 1e308, 0.0)
            .unwrap()
            .with_head(head)
            .unwrap();
        let err = ErrorState {
            voltage_error: 0.1,
            error_rate: 0.0,
        };
        let mut failed = false;
        for _ in 0..50 {
            match dnn_smc_duty(err, &mut state, &p, 1e-6) {
                Ok(_) => continue,
                Err(Error::NonFiniteValue(_)) => {
                    failed = true;
                    break;
                }
                Err(e) => panic!("unexpected error {e}"),
            }
        }
        assert!(failed, "overflowing adaptation never surfaced");
    }

    #[test]
    fn state_construction_validates_width() {
        let p = params();
        let (model, _) = representable_model(&p).unwrap();
        let state = AdaptiveSmcState::new(model, SmcConfig::default(), 1.0, 0.0).unwrap();
        let narrow = AdaptiveHead::new(vec![1.0, 2.0], 0.0, 1.0, 0.0).unwrap();
        assert!(state.clone().with_head(narrow).is_err());
        assert!(state.with_reference_weights(vec![1.0]).is_err());
    }
}
