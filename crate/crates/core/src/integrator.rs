//! Fixed-step RK4 propagation of a mode ladder, in the laboratory frame or in
//! the interaction picture of the free Hamiltonian.
//!
//! Time is measured in laser cycles and energies in `m c^2` internally, so the
//! Schrödinger equation reads `dc/dtau = -i (2 pi / kappa) H c`.
//!
//! While the envelope is flat the Hamiltonian is periodic with period one
//! cycle, and RK4 over a full cycle is a fixed linear map. When
//! [`IntegratorSettings::cycle_map`] is set, that map is assembled once and
//! applied per flat cycle instead of re-stepping; the result equals plain
//! stepping up to roundoff.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::TAU;
use std::time::Instant;

use crate::constants::CODATA_2018;
use crate::dirac::DiracSystem;
use crate::fields::{ConfigError, LaserConfig, ScaledUnits, Window};
use crate::pauli::{PauliSystem, PauliVariant};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Linear operator `c -> V c` frozen at one instant.
pub trait CouplingOp {
    /// Overwrites `out` with `V c`, in `m c^2`.
    fn apply(&self, c: &[C64], out: &mut [C64]);
}

/// A truncated mode ladder: diagonal free energies plus a time-dependent
/// interaction.
pub trait ModeSystem: Sync {
    type Coupling: CouplingOp;

    fn dim(&self) -> usize;

    fn units(&self) -> &ScaledUnits;

    /// Free energy of each amplitude, `m c^2`.
    fn free_energies(&self) -> &[f64];

    /// Interaction at laser phase `omega t` (rad) and envelope value `w`.
    fn coupling(&self, phase: f64, w: f64) -> Self::Coupling;

    fn initial_state(&self) -> Vec<C64>;

    /// `s_z` in units of `hbar`.
    fn spin_z(&self, c: &[C64]) -> f64;

    /// `lambda * rho(lambda / 4)`, where the model defines a density.
    fn density_quarter(&self, _c: &[C64]) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Dirac,
    PauliRel,
    PauliNonrel,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::Dirac, Model::PauliRel, Model::PauliNonrel];

    pub fn name(self) -> &'static str {
        match self {
            Model::Dirac => "dirac",
            Model::PauliRel => "pauli-rel",
            Model::PauliNonrel => "pauli-nonrel",
        }
    }
}

impl std::str::FromStr for Model {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Model::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                ConfigError::new("model", format!("unknown model {s:?}; expected dirac, pauli-rel or pauli-nonrel"))
            })
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// RK4 on the laboratory-frame amplitudes.
    Direct,
    /// RK4 on amplitudes with the free phases divided out.
    InteractionPicture,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Direct => "direct",
            Scheme::InteractionPicture => "interaction",
        }
    }

    /// Default number of RK4 steps per laser cycle for `model`.
    ///
    /// Removing the free phases does not help the Dirac ladder much: the
    /// coupling between positive- and negative-energy states still rotates
    /// at `2 m c^2 / hbar`, about 131 times per cycle at 0.159 nm, and
    /// keeping the norm within 1e-8 over tens of thousands of cycles takes
    /// 2^16 steps per cycle in either scheme.
    pub fn default_steps(self, model: Model) -> usize {
        match (model, self) {
            (Model::Dirac, _) => DEFAULT_STEPS_DIRAC,
            (_, Scheme::InteractionPicture) => DEFAULT_STEPS_PAULI_INTERACTION,
            (_, Scheme::Direct) => DEFAULT_STEPS_PAULI_DIRECT,
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "direct" => Ok(Scheme::Direct),
            "interaction" | "interaction-picture" => Ok(Scheme::InteractionPicture),
            _ => Err(ConfigError::new(
                "scheme",
                format!("unknown scheme {s:?}; expected direct or interaction"),
            )),
        }
    }
}

pub const DEFAULT_STEPS_DIRAC: usize = 1 << 16;
pub const DEFAULT_STEPS_PAULI_INTERACTION: usize = 256;
pub const DEFAULT_STEPS_PAULI_DIRECT: usize = 4096;
/// Occupation beyond `|n| = 8` is below 1e-12 for `xi < 1`.
pub const DEFAULT_N_MAX: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorSettings {
    pub scheme: Scheme,
    pub steps_per_cycle: usize,
    /// Cycles between observable samples.
    pub sample_every: usize,
    /// Abort once `|norm - 1|` exceeds this.
    pub norm_drift_abort: f64,
    /// Momentum ladder truncation.
    pub n_max: usize,
    /// Reuse the one-cycle map on flat-envelope cycles.
    pub cycle_map: bool,
}

impl IntegratorSettings {
    /// Interaction-picture defaults for `model`.
    pub fn for_model(model: Model) -> Self {
        Self::with_scheme(model, Scheme::InteractionPicture)
    }

    pub fn with_scheme(model: Model, scheme: Scheme) -> Self {
        Self {
            scheme,
            steps_per_cycle: scheme.default_steps(model),
            sample_every: 1,
            norm_drift_abort: 1e-6,
            n_max: DEFAULT_N_MAX,
            cycle_map: true,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.steps_per_cycle < 8 {
            return Err(ConfigError::new("steps_per_cycle", "must be at least 8"));
        }
        if self.sample_every == 0 {
            return Err(ConfigError::new("sample_every_cycles", "must be at least 1"));
        }
        if !(self.norm_drift_abort > 0.0) {
            return Err(ConfigError::new("norm_drift_abort", "must be positive"));
        }
        if self.n_max < 4 {
            return Err(ConfigError::new("n_max", "must be at least 4"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntegratorError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("norm drifted by {drift:e} at t = {t_cycles} cycles")]
    NormDrift { t_cycles: f64, drift: f64 },
    #[error("non-finite amplitude at t = {t_cycles} cycles")]
    NonFinite { t_cycles: f64 },
}

/// What produced a [`TimeSeries`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMeta {
    pub model: Model,
    pub config: LaserConfig,
    pub settings: IntegratorSettings,
    pub constants_fingerprint: String,
}

/// Observables sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    /// Sample times, s.
    pub times: Vec<f64>,
    /// `s_z`, units of `hbar`.
    pub s_z: Vec<f64>,
    pub norms: Vec<f64>,
    /// `lambda * rho(lambda / 4)`; Pauli models only.
    pub density: Option<Vec<f64>>,
    pub meta: RunMeta,
    /// Amplitudes at `T_total`.
    pub final_state: Vec<C64>,
    /// Norm at `T_total`.
    pub final_norm: f64,
    /// `s_z` at `T_total`.
    pub final_s_z: f64,
    /// Wall-clock seconds spent propagating.
    pub elapsed: f64,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Sample times in laser cycles.
    pub fn times_cycles(&self) -> Vec<f64> {
        let p = self.meta.config.period();
        self.times.iter().map(|t| t / p).collect()
    }
}

/// `sum |c|^2`.
pub fn norm(c: &[C64]) -> f64 {
    c.iter().map(|z| z.norm_sqr()).sum()
}

/// Envelope seen by the stepper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope {
    Window(Window),
    Flat,
}

impl Envelope {
    pub fn at(&self, tau: f64) -> f64 {
        match self {
            Envelope::Window(w) => w.at(tau),
            Envelope::Flat => 1.0,
        }
    }
}

struct Frame<C> {
    op: C,
    /// Free phases; empty in the laboratory frame.
    phases: Vec<C64>,
}

/// RK4 stepper for one system.
pub struct Stepper<'a, S: ModeSystem> {
    sys: &'a S,
    scheme: Scheme,
    rate: f64,
}

impl<'a, S: ModeSystem> Stepper<'a, S> {
    pub fn new(sys: &'a S, scheme: Scheme) -> Self {
        Self {
            sys,
            scheme,
            rate: sys.units().energy_to_rate(),
        }
    }

    /// Interaction and free phases at `tau0 + local`. Interaction-picture
    /// amplitudes are taken relative to `tau0`, so the phases only ever see
    /// small arguments.
    fn frame(&self, tau0: f64, local: f64, env: &Envelope) -> Frame<S::Coupling> {
        let tau = tau0 + local;
        let frac = tau - tau.floor();
        let op = self.sys.coupling(TAU * frac, env.at(tau));
        let phases = match self.scheme {
            Scheme::InteractionPicture => self
                .sys
                .free_energies()
                .iter()
                .map(|e| C64::from_polar(1.0, -self.rate * e * local))
                .collect(),
            Scheme::Direct => Vec::new(),
        };
        Frame { op, phases }
    }

    /// `out = dx/dtau` for every vector of the batch `x`.
    fn eval(&self, f: &Frame<S::Coupling>, x: &[C64], out: &mut [C64], scratch: &mut [C64]) {
        let d = self.sys.dim();
        let rate = self.rate;
        let free = self.sys.free_energies();
        for (xs, os) in x.chunks_exact(d).zip(out.chunks_exact_mut(d)) {
            if f.phases.is_empty() {
                f.op.apply(xs, os);
                for ((o, v), e) in os.iter_mut().zip(xs).zip(free) {
                    let z = *o + v * e;
                    *o = C64::new(z.im * rate, -z.re * rate);
                }
            } else {
                for ((s, v), p) in scratch.iter_mut().zip(xs).zip(&f.phases) {
                    *s = v * p;
                }
                f.op.apply(scratch, os);
                for (o, p) in os.iter_mut().zip(&f.phases) {
                    let z = *o * p.conj();
                    *o = C64::new(z.im * rate, -z.re * rate);
                }
            }
        }
    }

    /// Advances a batch of state vectors (stored back to back) from `tau0`
    /// to `tau1` cycles in `steps` equal RK4 steps. `tau1 < tau0` runs
    /// backwards.
    pub fn segment(&self, states: &mut [C64], tau0: f64, tau1: f64, steps: usize, env: &Envelope) {
        let d = self.sys.dim();
        assert!(steps > 0 && states.len().is_multiple_of(d));
        let h = (tau1 - tau0) / steps as f64;
        let n = states.len();
        let (mut k1, mut k2, mut k3, mut k4) =
            (vec![ZERO; n], vec![ZERO; n], vec![ZERO; n], vec![ZERO; n]);
        let mut tmp = vec![ZERO; n];
        let mut scratch = vec![ZERO; d];

        let mut start = self.frame(tau0, 0.0, env);
        for i in 0..steps {
            let l0 = h * i as f64;
            let mid = self.frame(tau0, l0 + 0.5 * h, env);
            let end = self.frame(tau0, h * (i + 1) as f64, env);
            self.eval(&start, states, &mut k1, &mut scratch);
            for ((t, s), a) in tmp.iter_mut().zip(states.iter()).zip(&k1) {
                *t = s + a * (0.5 * h);
            }
            self.eval(&mid, &tmp, &mut k2, &mut scratch);
            for ((t, s), a) in tmp.iter_mut().zip(states.iter()).zip(&k2) {
                *t = s + a * (0.5 * h);
            }
            self.eval(&mid, &tmp, &mut k3, &mut scratch);
            for ((t, s), a) in tmp.iter_mut().zip(states.iter()).zip(&k3) {
                *t = s + a * h;
            }
            self.eval(&end, &tmp, &mut k4, &mut scratch);
            for (j, s) in states.iter_mut().enumerate() {
                *s += (k1[j] + (k2[j] + k3[j]) * 2.0 + k4[j]) * (h / 6.0);
            }
            start = end;
        }

        if self.scheme == Scheme::InteractionPicture {
            let span = tau1 - tau0;
            let free = self.sys.free_energies();
            for xs in states.chunks_exact_mut(d) {
                for (v, e) in xs.iter_mut().zip(free) {
                    *v *= C64::from_polar(1.0, -self.rate * e * span);
                }
            }
        }
    }

    /// RK4 map over one flat-envelope cycle, as a row-major `dim x dim`
    /// matrix acting on laboratory-frame amplitudes.
    pub fn cycle_map(&self, steps: usize) -> Vec<C64> {
        let d = self.sys.dim();
        let mut cols = vec![ZERO; d * d];
        for j in 0..d {
            cols[j * d + j] = ONE;
        }
        let per_task = d.div_ceil(rayon::current_num_threads()).max(1);
        cols.par_chunks_mut(per_task * d)
            .for_each(|chunk| self.segment(chunk, 0.0, 1.0, steps, &Envelope::Flat));
        let mut rows = vec![ZERO; d * d];
        for j in 0..d {
            for i in 0..d {
                rows[i * d + j] = cols[j * d + i];
            }
        }
        rows
    }
}

fn apply_matrix(m: &[C64], c: &mut Vec<C64>, buf: &mut Vec<C64>) {
    let d = c.len();
    buf.clear();
    buf.extend(m.chunks_exact(d).map(|row| {
        row.iter().zip(c.iter()).fold(ZERO, |acc, (a, b)| acc + a * b)
    }));
    std::mem::swap(c, buf);
}

/// Propagates the rest state through `cfg` under `model`.
pub fn propagate(
    model: Model,
    cfg: &LaserConfig,
    settings: &IntegratorSettings,
) -> Result<TimeSeries, IntegratorError> {
    cfg.validate()?;
    settings.validate()?;
    match model {
        Model::Dirac => {
            let sys = DiracSystem::for_config(cfg, settings.n_max);
            propagate_system(&sys, model, cfg, settings)
        }
        Model::PauliRel | Model::PauliNonrel => {
            let variant = if model == Model::PauliRel {
                PauliVariant::Relativistic
            } else {
                PauliVariant::NonRelativistic
            };
            let sys = PauliSystem::for_config(cfg, settings.n_max, variant);
            propagate_system(&sys, model, cfg, settings)
        }
    }
}

/// Propagates the system's initial state from `t = 0` to `T_total`.
pub fn propagate_system<S: ModeSystem>(
    sys: &S,
    model: Model,
    cfg: &LaserConfig,
    settings: &IntegratorSettings,
) -> Result<TimeSeries, IntegratorError> {
    settings.validate()?;
    let start = Instant::now();
    let period = cfg.period();
    let total = cfg.t_cycles();
    let window = Window {
        ramp: cfg.delta_t_cycles(),
        total,
    };
    let env = Envelope::Window(window);
    let stepper = Stepper::new(sys, settings.scheme);
    let steps = settings.steps_per_cycle;

    let mut c = sys.initial_state();
    let mut buf = Vec::with_capacity(c.len());
    let mut map: Option<Vec<C64>> = None;
    let want_density = sys.density_quarter(&c).is_some();
    let mut times = Vec::new();
    let mut s_z = Vec::new();
    let mut norms = Vec::new();
    let mut density = Vec::new();
    let mut record = |tau: f64, c: &[C64]| {
        times.push(tau * period);
        s_z.push(sys.spin_z(c));
        norms.push(norm(c));
        if let Some(d) = sys.density_quarter(c) {
            density.push(d);
        }
    };
    record(0.0, &c);

    let check = |tau: f64, c: &[C64]| -> Result<(), IntegratorError> {
        let n = norm(c);
        if !n.is_finite() {
            return Err(IntegratorError::NonFinite { t_cycles: tau });
        }
        let drift = (n - 1.0).abs();
        if drift > settings.norm_drift_abort {
            return Err(IntegratorError::NormDrift {
                t_cycles: tau,
                drift,
            });
        }
        Ok(())
    };

    let full = (total * (1.0 + 1e-12)).floor() as usize;
    for j in 0..full {
        let (a, b) = (j as f64, j as f64 + 1.0);
        if settings.cycle_map && window.is_flat_on(a, b) {
            let m = map.get_or_insert_with(|| stepper.cycle_map(steps));
            apply_matrix(m, &mut c, &mut buf);
        } else {
            stepper.segment(&mut c, a, b, steps, &env);
        }
        check(b, &c)?;
        if (j + 1) % settings.sample_every == 0 {
            record(b, &c);
        }
    }
    let rest = total - full as f64;
    if rest > 1e-9 {
        let n = ((rest * steps as f64).ceil() as usize).max(1);
        stepper.segment(&mut c, full as f64, total, n, &env);
        check(total, &c)?;
    }

    let final_norm = norm(&c);
    let final_s_z = sys.spin_z(&c);
    Ok(TimeSeries {
        times,
        s_z,
        norms,
        density: want_density.then_some(density),
        meta: RunMeta {
            model,
            config: *cfg,
            settings: *settings,
            constants_fingerprint: CODATA_2018.fingerprint(),
        },
        final_state: c,
        final_norm,
        final_s_z,
        elapsed: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn fast() -> IntegratorSettings {
        IntegratorSettings {
            steps_per_cycle: 256,
            ..IntegratorSettings::for_model(Model::PauliRel)
        }
    }

    #[test]
    fn settings_validation() {
        let bad = IntegratorSettings {
            steps_per_cycle: 4,
            ..fast()
        };
        assert_eq!(bad.validate().unwrap_err().field, "steps_per_cycle");
        let bad = IntegratorSettings {
            norm_drift_abort: 0.0,
            ..fast()
        };
        assert_eq!(bad.validate().unwrap_err().field, "norm_drift_abort");
        assert!(fast().validate().is_ok());
    }

    #[test]
    fn norm_basics() {
        let c = vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        assert!((norm(&c) - 1.0).abs() < 1e-15);
        let d: Vec<_> = c.iter().map(|z| z * 2.0).collect();
        assert!((norm(&d) - 4.0 * norm(&c)).abs() < 1e-14);
    }

    #[test]
    fn zero_field_keeps_spin() {
        let cfg = LaserConfig::from_cycles(0.159e-9, 0.0, FRAC_PI_2, 1.0, 20.0).unwrap();
        for model in Model::ALL {
            let ts = propagate(model, &cfg, &fast()).unwrap();
            assert_eq!(ts.len(), 21);
            for (s, n) in ts.s_z.iter().zip(&ts.norms) {
                assert!((s - 0.5).abs() < 1e-14);
                assert!((n - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn partial_final_cycle() {
        let cfg = LaserConfig::from_cycles(0.159e-9, 2e14, FRAC_PI_2, 1.0, 6.5).unwrap();
        let ts = propagate(Model::PauliRel, &cfg, &fast()).unwrap();
        assert_eq!(ts.len(), 7);
        assert!((ts.final_norm - 1.0).abs() < 1e-9);
        assert!(ts.density.as_ref().unwrap().len() == 7);
    }

    #[test]
    fn parse_names() {
        for m in Model::ALL {
            assert_eq!(m.name().parse::<Model>().unwrap(), m);
        }
        assert!("klein-gordon".parse::<Model>().is_err());
        assert_eq!("direct".parse::<Scheme>().unwrap(), Scheme::Direct);
    }
}
