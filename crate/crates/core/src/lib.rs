//! Deterministic buck converter simulation and control library.

pub mod adaptive_smc;
pub mod error;
pub mod harness;
pub mod neural;
pub mod plant;
pub mod smc;

pub use adaptive_smc::{
    composite_lyapunov, dnn_smc_duty, representable_model, true_f, AdaptiveSmcState,
    DEFAULT_ADAPTATION_GAIN,
};
pub use error::{Error, Result};
pub use harness::{
    compare_controllers, comparison_scenarios, compute_metrics, default_dataset_scenarios,
    dnn_smc_config, generate_dataset, run_scenario, ComparisonReport, Controller, Event, EventKind,
    Metrics, PlantModel, ReportRow, Scenario, Trace, TraceRecord,
};
pub use neural::{
    correlation, cost, hyperparameter_sweep, rmse, train, train_model, Activation, AdaptiveHead,
    DataRow, Dataset, Gradients, Mlp, Optimizer, Standardization, SweepCell, SweepTable,
    TrainConfig, TrainReport, TrainedModel, DEFAULT_LAYER_SIZES,
};
pub use plant::{
    averaged_derivative, error_coordinates, error_dynamics, euler_step, pwm_gate, rk4_step,
    switched_derivative, ConverterParams, Disturbance, DisturbanceKind, ErrorState,
    PlantDerivative, PlantState,
};
pub use smc::{
    equivalent_control, lyapunov_value, sliding_surface, smc_duty, smc_duty_unclamped,
    switching_control, switching_function, SmcConfig,
};
