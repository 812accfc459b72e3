//! Linear-regression measurements with unknown-but-bounded noise.
//!
//! Each node owns one fixed unit regressor and a noise bound. A scalar
//! measurement `y = regressor . theta + w` with `|w| <= bound` confines
//! the parameter to a strip of width `2 * bound`, and because the
//! regressor never changes, the intersection of all strips seen so far is
//! again a strip whose bounds depend only on the running maximum and
//! minimum of `y`. Nodes therefore store two numbers instead of a
//! measurement history.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{Slab, Vector};
use crate::rng::keyed_rng;
use crate::scalar::Real;

/// Stream key reserved for drawing the true parameter; node indices are
/// `usize` values and never reach it.
const THETA_STREAM: u64 = u64::MAX;

/// One node's fixed measurement channel: a unit regressor and the noise
/// bound it trusts.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SensorModel<T> {
    regressor: Vector<T>,
    noise_bound: T,
}

impl<T: Real> SensorModel<T> {
    /// Normalizes the regressor (rejecting zero) and validates the bound.
    /// Already-unit regressors pass through bit-exact.
    pub fn new(regressor: Vector<T>, noise_bound: T) -> Result<Self> {
        if !noise_bound.is_finite() || noise_bound < T::zero() {
            return Err(Error::InvalidConfig("noise bound must be finite and non-negative".into()));
        }
        let regressor = if (regressor.norm() - T::one()).abs() <= T::unit_norm_tolerance() {
            regressor
        } else {
            regressor.normalized()?
        };
        Ok(Self { regressor, noise_bound })
    }

    #[inline]
    pub fn regressor(&self) -> &Vector<T> {
        &self.regressor
    }

    #[inline]
    pub fn noise_bound(&self) -> T {
        self.noise_bound
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.regressor.dim()
    }

    /// Copy of this channel with the noise bound rescaled; how a
    /// mistrusted bound enters a scenario.
    pub fn with_bound_scale(&self, scale: T) -> Result<Self> {
        if !scale.is_finite() || scale <= T::zero() {
            return Err(Error::InvalidConfig("bound scale must be finite and positive".into()));
        }
        Ok(Self { regressor: self.regressor.clone(), noise_bound: self.noise_bound * scale })
    }
}

/// A scalar reading taken by `node` at measurement index `instant`
/// (1-based, counted per node).
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Measurement<T> {
    pub node: usize,
    pub instant: u64,
    pub value: T,
}

/// The strip a single measurement carves out: all parameters whose
/// response lies within the trusted bound of the observed value.
pub fn measurement_set<T: Real>(m: &Measurement<T>, model: &SensorModel<T>) -> Result<Slab<T>> {
    Slab::new(model.regressor.clone(), m.value - model.noise_bound, m.value + model.noise_bound)
}

/// Running intersection of every strip a node has seen, stored as the
/// extreme measurement values.
///
/// The derived slab has bounds `[max_y - bound, min_y + bound]`, which
/// equals the intersection of the individual strips bit for bit: `max`
/// picks one of the measurement values, and subtracting the bound is
/// monotone, so folding `max` before or after the subtraction selects
/// the same float. The slab flags empty once the spread of measurements
/// exceeds twice the bound.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct RunningSlab<T> {
    model: SensorModel<T>,
    max_y: T,
    min_y: T,
    count: u64,
}

impl<T: Real> RunningSlab<T> {
    /// Starts from the node's first measurement.
    pub fn new(model: SensorModel<T>, first: &Measurement<T>) -> Self {
        Self { model, max_y: first.value, min_y: first.value, count: 1 }
    }

    /// Folds in one more measurement. The measurement must come from the
    /// same node's channel; feeding another node's stream here is a bug.
    pub fn update(&mut self, m: &Measurement<T>) {
        self.max_y = self.max_y.max(m.value);
        self.min_y = self.min_y.min(m.value);
        self.count += 1;
    }

    #[inline]
    pub fn model(&self) -> &SensorModel<T> {
        &self.model
    }

    #[inline]
    pub fn max_y(&self) -> T {
        self.max_y
    }

    #[inline]
    pub fn min_y(&self) -> T {
        self.min_y
    }

    #[inline]
    pub fn count(&self) -> u64 {
        self.count
    }

    /// The intersection of all strips seen so far.
    pub fn slab(&self) -> Result<Slab<T>> {
        Slab::new(
            self.model.regressor.clone(),
            self.max_y - self.model.noise_bound,
            self.min_y + self.model.noise_bound,
        )
    }

    /// True once the measurements contradict the trusted bound.
    pub fn is_empty(&self) -> bool {
        self.max_y - self.model.noise_bound > self.min_y + self.model.noise_bound
    }
}

/// The noise law measurements are drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseLaw {
    /// Uniform on `[-bound, +bound]`.
    UniformSymmetric,
}

/// Distribution regressor directions are drawn from. The raw draw is
/// normalized either way; the law only decides which orthants the unit
/// directions can point into.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressorLaw {
    /// Coordinates uniform in `[-1, 1]`: directions spread over every
    /// orthant. The reference iteration counts were produced under this
    /// law.
    #[default]
    SymmetricCube,
    /// Coordinates uniform in `[0, 1]`: directions confined to the
    /// positive orthant. Mutually acute regressors leave elongated
    /// feasible intersections, roughly doubling convergence times.
    PositiveCube,
}

impl RegressorLaw {
    fn coordinate_low(self) -> f64 {
        match self {
            RegressorLaw::SymmetricCube => -1.0,
            RegressorLaw::PositiveCube => 0.0,
        }
    }
}

/// Ranges for random scenario generation. Defaults match the reference
/// simulation study: parameter and initial estimates in `[-5, 5]^n`,
/// noise bounds in `[0.10, 0.13]`, bounds trusted as-is.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScenarioConfig<T> {
    pub theta_range: (T, T),
    pub init_range: (T, T),
    pub epsilon_range: (T, T),
    /// Factor applied to the true noise bound when building measurement
    /// strips. Values below 1 deliberately understate the noise, which
    /// eventually empties a feasible set.
    pub assumed_bound_scale: T,
    pub regressor_law: RegressorLaw,
}

impl<T: Real> Default for ScenarioConfig<T> {
    fn default() -> Self {
        Self {
            theta_range: (T::of(-5.0), T::of(5.0)),
            init_range: (T::of(-5.0), T::of(5.0)),
            epsilon_range: (T::of(0.10), T::of(0.13)),
            assumed_bound_scale: T::one(),
            regressor_law: RegressorLaw::default(),
        }
    }
}

impl<T: Real> ScenarioConfig<T> {
    fn validate(&self) -> Result<()> {
        let ranges = [
            ("theta_range", self.theta_range),
            ("init_range", self.init_range),
            ("epsilon_range", self.epsilon_range),
        ];
        for (name, (lo, hi)) in ranges {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be a finite low..high range"
                )));
            }
        }
        if self.epsilon_range.0 < T::zero() {
            return Err(Error::InvalidConfig("epsilon_range must be non-negative".into()));
        }
        if !self.assumed_bound_scale.is_finite() || self.assumed_bound_scale <= T::zero() {
            return Err(Error::InvalidConfig("assumed_bound_scale must be positive".into()));
        }
        Ok(())
    }
}

/// A fully specified estimation problem: the hidden parameter, each
/// node's measurement channel, the initial estimates, and the seed that
/// fixes every noise draw.
///
/// Measurement values are pure functions of `(noise_seed, node,
/// instant)`, so any two runs — and any two activation schedules — that
/// ask for a node's `m`-th measurement get the same value.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Scenario<T> {
    theta_star: Vector<T>,
    sensors: Vec<SensorModel<T>>,
    initial_estimates: Vec<Vector<T>>,
    noise_seed: u64,
    noise_law: NoiseLaw,
    assumed_bound_scale: T,
}

impl<T: Real> Scenario<T> {
    /// Assembles a scenario from explicit parts.
    pub fn new(
        theta_star: Vector<T>,
        sensors: Vec<SensorModel<T>>,
        initial_estimates: Vec<Vector<T>>,
        noise_seed: u64,
        assumed_bound_scale: T,
    ) -> Result<Self> {
        if sensors.is_empty() {
            return Err(Error::InvalidSize("scenario needs at least one node".into()));
        }
        if initial_estimates.len() != sensors.len() {
            return Err(Error::BatchSizeMismatch {
                expected: sensors.len(),
                got: initial_estimates.len(),
            });
        }
        let dim = theta_star.dim();
        for s in &sensors {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: s.dim() });
            }
        }
        for e in &initial_estimates {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: e.dim() });
            }
        }
        if !assumed_bound_scale.is_finite() || assumed_bound_scale <= T::zero() {
            return Err(Error::InvalidConfig("assumed_bound_scale must be positive".into()));
        }
        Ok(Self {
            theta_star,
            sensors,
            initial_estimates,
            noise_seed,
            noise_law: NoiseLaw::UniformSymmetric,
            assumed_bound_scale,
        })
    }

    #[inline]
    pub fn theta_star(&self) -> &Vector<T> {
        &self.theta_star
    }

    #[inline]
    pub fn sensors(&self) -> &[SensorModel<T>] {
        &self.sensors
    }

    #[inline]
    pub fn initial_estimates(&self) -> &[Vector<T>] {
        &self.initial_estimates
    }

    #[inline]
    pub fn noise_seed(&self) -> u64 {
        self.noise_seed
    }

    #[inline]
    pub fn noise_law(&self) -> NoiseLaw {
        self.noise_law
    }

    #[inline]
    pub fn assumed_bound_scale(&self) -> T {
        self.assumed_bound_scale
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.sensors.len()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.theta_star.dim()
    }

    /// The channel actually used to build measurement strips: the true
    /// sensor with its bound rescaled by `assumed_bound_scale`.
    pub fn assumed_sensor(&self, node: usize) -> Result<SensorModel<T>> {
        self.sensors[node].with_bound_scale(self.assumed_bound_scale)
    }

    /// The `instant`-th reading of `node` (1-based): the true response
    /// plus a noise draw keyed by `(noise_seed, node, instant)`. Pure:
    /// the same arguments always produce the same value.
    pub fn measure(&self, node: usize, instant: u64) -> Measurement<T> {
        assert!(node < self.sensors.len(), "node {node} out of range");
        assert!(instant >= 1, "measurement instants are 1-based");
        let sensor = &self.sensors[node];
        let truth = sensor.regressor.dot(&self.theta_star);
        let bound = sensor.noise_bound.to_f64().expect("noise bound fits in f64");
        let noise = if bound == 0.0 {
            T::zero()
        } else {
            let mut rng = keyed_rng(self.noise_seed, node as u64, instant);
            let w = T::of(rng.gen_range(-bound..=bound));
            // Rounding into T must not let the draw escape the bound.
            w.min(sensor.noise_bound).max(-sensor.noise_bound)
        };
        Measurement { node, instant, value: truth + noise }
    }

    /// The strip carved out by that reading, using the assumed bound.
    pub fn measurement_slab(&self, node: usize, instant: u64) -> Result<Slab<T>> {
        let m = self.measure(node, instant);
        measurement_set(&m, &self.assumed_sensor(node)?)
    }
}

/// Draws a random scenario: regressors uniform on a cube per the
/// configured law then normalized, noise bounds and parameters uniform in
/// the configured ranges. Deterministic in `seed`; generation streams use
/// measurement index 0, which real measurements never touch, so scenario
/// generation and measurement noise never share a draw.
pub fn generate_scenario<T: Real>(
    n: usize,
    nodes: usize,
    seed: u64,
    cfg: &ScenarioConfig<T>,
) -> Result<Scenario<T>> {
    if n == 0 {
        return Err(Error::InvalidSize("parameter dimension must be at least 1".into()));
    }
    if nodes == 0 {
        return Err(Error::InvalidSize("scenario needs at least one node".into()));
    }
    cfg.validate()?;

    let draw = |rng: &mut rand_chacha::ChaCha8Rng, (lo, hi): (T, T)| -> T {
        let lo = lo.to_f64().expect("range fits in f64");
        let hi = hi.to_f64().expect("range fits in f64");
        if lo == hi {
            T::of(lo)
        } else {
            T::of(rng.gen_range(lo..=hi))
        }
    };

    let mut theta_rng = keyed_rng(seed, THETA_STREAM, 0);
    let theta: Vec<T> = (0..n).map(|_| draw(&mut theta_rng, cfg.theta_range)).collect();
    let theta_star = Vector::new(theta)?;

    let mut sensors = Vec::with_capacity(nodes);
    let mut inits = Vec::with_capacity(nodes);
    for i in 0..nodes {
        let mut rng = keyed_rng(seed, i as u64, 0);
        // Draw order is part of the determinism contract: regressor
        // first, then the noise bound, then the initial estimate.
        let regressor = loop {
            let lo = cfg.regressor_law.coordinate_low();
            let coords: Vec<T> = (0..n).map(|_| T::of(rng.gen_range(lo..=1.0))).collect();
            let v = Vector::new(coords)?;
            if v.norm() > T::zero() {
                break v.normalized()?;
            }
        };
        let epsilon = draw(&mut rng, cfg.epsilon_range);
        sensors.push(SensorModel::new(regressor, epsilon)?);
        let init: Vec<T> = (0..n).map(|_| draw(&mut rng, cfg.init_range)).collect();
        inits.push(Vector::new(init)?);
    }

    Scenario::new(theta_star, sensors, inits, seed, cfg.assumed_bound_scale)
}
