//! Channel synthesis across frequency, time and spatial domains.
//!
//! A channel realization is a sum over propagation paths of complex gains
//! sqrt(p) * exp(-j beta) times the Kronecker product of per-domain steering
//! vectors, vectorized as (frequency x time x receive x transmit) with the
//! transmit index varying fastest.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::rng::ParamStreams;
use crate::toeplitz::DomainDims;

pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

/// Hard cap on the total vector dimension M; synthesis refuses anything larger.
pub const DIM_CAP: usize = 1 << 16;

/// Vectorized channel; length equals the product of the config's domain sizes.
pub type ChannelVec = DVector<Complex64>;

/// Sampling grid of the channel: domain sizes and carrier parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub m_sc: usize,
    pub m_sn: usize,
    pub m_r: usize,
    pub m_t: usize,
    /// Subcarrier spacing in Hz.
    pub delta_f: f64,
    /// Symbol duration in s.
    pub delta_t: f64,
    /// Carrier frequency in Hz.
    pub f_c: f64,
}

impl ChannelConfig {
    pub fn new(
        m_sc: usize,
        m_sn: usize,
        m_r: usize,
        m_t: usize,
        delta_f: f64,
        delta_t: f64,
        f_c: f64,
    ) -> Result<Self> {
        let cfg = Self { m_sc, m_sn, m_r, m_t, delta_f, delta_t, f_c };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_sc == 0 || self.m_sn == 0 || self.m_r == 0 || self.m_t == 0 {
            return Err(Error::InvalidConfig("all domain counts must be >= 1".into()));
        }
        if !(self.delta_f > 0.0) || !(self.delta_t > 0.0) || !(self.f_c > 0.0) {
            return Err(Error::InvalidConfig(
                "delta_f, delta_t and f_c must be positive".into(),
            ));
        }
        if self.total_dim() > DIM_CAP {
            return Err(Error::DimensionCap(self.total_dim(), DIM_CAP));
        }
        Ok(())
    }

    pub fn total_dim(&self) -> usize {
        self.m_sc * self.m_sn * self.m_r * self.m_t
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.f_c
    }

    /// Domain sizes in vectorization order (transmit fastest).
    pub fn dims(&self) -> DomainDims {
        DomainDims::new(vec![self.m_sc, self.m_sn, self.m_r, self.m_t])
            .expect("validated config")
    }
}

/// Per-path parameters: power, phase, delay, Doppler shift, arrival and
/// departure angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathParams {
    pub p: f64,
    pub beta: f64,
    pub tau: f64,
    pub nu: f64,
    pub theta_r: f64,
    pub theta_t: f64,
}

impl PathParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.p, self.beta, self.tau, self.nu, self.theta_r, self.theta_t];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("path parameter"));
        }
        if self.p < 0.0 {
            return Err(Error::InvalidConfig("path power must be >= 0".into()));
        }
        if !(0.0..2.0 * PI).contains(&self.beta) {
            return Err(Error::InvalidConfig("phase must lie in [0, 2pi)".into()));
        }
        if self.tau < 0.0 {
            return Err(Error::InvalidConfig("delay must be >= 0".into()));
        }
        let half_pi = PI / 2.0;
        if self.theta_r.abs() > half_pi || self.theta_t.abs() > half_pi {
            return Err(Error::InvalidConfig("angles must lie in [-pi/2, pi/2]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Frequency,
    Time,
    Rx,
    Tx,
}

/// Uniform-grid steering vector for one domain: entry k is exp(-j k w) with
/// w = 2 pi delta_f tau (frequency), 2 pi delta_t nu (time) or
/// pi sin(theta) (rx/tx, half-wavelength spacing).
pub fn steering_vector(
    domain: Domain,
    param: f64,
    m: usize,
    cfg: &ChannelConfig,
) -> Result<DVector<Complex64>> {
    if m == 0 {
        return Err(Error::EmptyInput("steering vector length"));
    }
    if !param.is_finite() {
        return Err(Error::NonFinite("steering parameter"));
    }
    let omega = match domain {
        Domain::Frequency => {
            if param < 0.0 {
                return Err(Error::InvalidConfig("delay must be >= 0".into()));
            }
            2.0 * PI * cfg.delta_f * param
        }
        Domain::Time => 2.0 * PI * cfg.delta_t * param,
        Domain::Rx | Domain::Tx => {
            if param.abs() > PI / 2.0 {
                return Err(Error::InvalidConfig("angle must lie in [-pi/2, pi/2]".into()));
            }
            PI * param.sin()
        }
    };
    Ok(DVector::from_fn(m, |k, _| Complex64::from_polar(1.0, -(k as f64) * omega)))
}

/// Full steering vector across all four domains of `cfg` for one path.
pub fn full_steering(cfg: &ChannelConfig, path: &PathParams) -> Result<DVector<Complex64>> {
    let af = steering_vector(Domain::Frequency, path.tau, cfg.m_sc, cfg)?;
    let at = steering_vector(Domain::Time, path.nu, cfg.m_sn, cfg)?;
    let ar = steering_vector(Domain::Rx, path.theta_r, cfg.m_r, cfg)?;
    let atx = steering_vector(Domain::Tx, path.theta_t, cfg.m_t, cfg)?;

    let m = cfg.total_dim();
    let mut out = DVector::from_element(m, Complex64::new(0.0, 0.0));
    let mut idx = 0usize;
    for f in af.iter() {
        for t in at.iter() {
            let ft = f * t;
            for r in ar.iter() {
                let ftr = ft * r;
                for x in atx.iter() {
                    out[idx] = ftr * x;
                    idx += 1;
                }
            }
        }
    }
    Ok(out)
}

/// Sums the per-path rank-one contributions sqrt(p) exp(-j beta) a(path).
pub fn synthesize_channel(cfg: &ChannelConfig, paths: &[PathParams]) -> Result<ChannelVec> {
    cfg.validate()?;
    if paths.is_empty() {
        return Err(Error::EmptyInput("path list"));
    }
    let m = cfg.total_dim();
    let mut h = DVector::from_element(m, Complex64::new(0.0, 0.0));
    for path in paths {
        path.validate()?;
        let gain = Complex64::from_polar(path.p.sqrt(), -path.beta);
        let a = full_steering(cfg, path)?;
        h.axpy(gain, &a, Complex64::new(1.0, 0.0));
    }
    Ok(h)
}

/// One-dimensional marginal distribution for a path-parameter component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case", deny_unknown_fields)]
pub enum Marginal {
    Constant { value: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl Marginal {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Marginal::Constant { value } => {
                if !value.is_finite() {
                    return Err(Error::NonFinite("constant marginal"));
                }
            }
            Marginal::Uniform { lo, hi } => {
                if !lo.is_finite() || !hi.is_finite() {
                    return Err(Error::NonFinite("uniform marginal bound"));
                }
                if lo > hi {
                    return Err(Error::InvalidConfig(format!(
                        "uniform marginal has lo {lo} > hi {hi}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            Marginal::Constant { value } => value,
            Marginal::Uniform { lo, hi } => {
                if lo == hi {
                    lo
                } else {
                    rng.gen_range(lo..hi)
                }
            }
        }
    }
}

/// Declarative prior over the non-phase path parameters. Phases are always
/// drawn i.i.d. uniform on [0, 2 pi) from their own stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathPrior {
    pub num_paths: usize,
    pub power: Marginal,
    /// Rescale drawn powers so they sum to one.
    #[serde(default)]
    pub normalize_power: bool,
    pub delay: Marginal,
    pub doppler: Marginal,
    pub aoa: Marginal,
    pub aod: Marginal,
}

impl PathPrior {
    pub fn validate(&self) -> Result<()> {
        if self.num_paths == 0 {
            return Err(Error::InvalidConfig("prior needs at least one path".into()));
        }
        for m in [&self.power, &self.delay, &self.doppler, &self.aoa, &self.aod] {
            m.validate()?;
        }
        let check_range = |m: &Marginal, lo_ok: f64, hi_ok: f64, what: &str| -> Result<()> {
            let (lo, hi) = match *m {
                Marginal::Constant { value } => (value, value),
                Marginal::Uniform { lo, hi } => (lo, hi),
            };
            if lo < lo_ok || hi > hi_ok {
                return Err(Error::InvalidConfig(format!(
                    "{what} marginal support [{lo}, {hi}] outside [{lo_ok}, {hi_ok}]"
                )));
            }
            Ok(())
        };
        check_range(&self.power, 0.0, f64::INFINITY, "power")?;
        check_range(&self.delay, 0.0, f64::INFINITY, "delay")?;
        let hp = PI / 2.0;
        check_range(&self.aoa, -hp, hp, "arrival angle")?;
        check_range(&self.aod, -hp, hp, "departure angle")?;
        if self.normalize_power {
            // A prior that can only draw all-zero powers cannot be normalized.
            let max_power = match self.power {
                Marginal::Constant { value } => value,
                Marginal::Uniform { hi, .. } => hi,
            };
            if max_power <= 0.0 {
                return Err(Error::InvalidConfig(
                    "power normalization requires a prior with positive mass".into(),
                ));
            }
        }
        Ok(())
    }

    /// The spatial three-path prior used in the estimation experiments:
    /// uniform arrival angles, uniform powers normalized to sum to one.
    pub fn spatial_three_path() -> Self {
        Self {
            num_paths: 3,
            power: Marginal::Uniform { lo: 0.0, hi: 1.0 },
            normalize_power: true,
            delay: Marginal::Constant { value: 0.0 },
            doppler: Marginal::Constant { value: 0.0 },
            aoa: Marginal::Uniform { lo: -PI / 2.0, hi: PI / 2.0 },
            aod: Marginal::Constant { value: 0.0 },
        }
    }
}

/// Draws `l` paths from the prior. Each parameter family consumes its own
/// stream, so freezing one family while resampling another is possible by
/// reusing streams across calls.
pub fn sample_paths(prior: &PathPrior, l: usize, streams: &mut ParamStreams) -> Result<Vec<PathParams>> {
    if l == 0 {
        return Err(Error::EmptyInput("path count"));
    }
    prior.validate()?;
    let mut paths = Vec::with_capacity(l);
    for _ in 0..l {
        paths.push(PathParams {
            p: prior.power.sample(&mut streams.power),
            beta: streams.beta.gen_range(0.0..2.0 * PI),
            tau: prior.delay.sample(&mut streams.delay),
            nu: prior.doppler.sample(&mut streams.doppler),
            theta_r: prior.aoa.sample(&mut streams.angle),
            theta_t: prior.aod.sample(&mut streams.angle),
        });
    }
    if prior.normalize_power {
        normalize_powers(&mut paths, prior, streams);
    }
    Ok(paths)
}

fn normalize_powers(paths: &mut [PathParams], prior: &PathPrior, streams: &mut ParamStreams) {
    loop {
        let total: f64 = paths.iter().map(|p| p.p).sum();
        if total > 0.0 {
            for p in paths.iter_mut() {
                p.p /= total;
            }
            return;
        }
        // All-zero draw has probability zero for a continuous prior; redraw.
        for p in paths.iter_mut() {
            p.p = prior.power.sample(&mut streams.power);
        }
    }
}

/// Velocity-labeled temporal scenario: four disjoint velocity regions with
/// given masses, trajectories sampled on the time domain only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VelocityScenario {
    /// Disjoint, ordered [lo, hi] velocity intervals in m/s.
    pub regions: [[f64; 2]; 4],
    /// Region probabilities, summing to one.
    pub masses: [f64; 4],
    /// Paths per trajectory.
    pub paths: usize,
    pub cfg: ChannelConfig,
}

impl VelocityScenario {
    pub fn validate(&self) -> Result<()> {
        self.cfg.validate()?;
        if self.cfg.m_sc != 1 || self.cfg.m_r != 1 || self.cfg.m_t != 1 {
            return Err(Error::InvalidConfig(
                "velocity scenario must have m_sc = m_r = m_t = 1".into(),
            ));
        }
        if self.paths == 0 {
            return Err(Error::InvalidConfig("paths per trajectory must be >= 1".into()));
        }
        let mut prev_hi = f64::NEG_INFINITY;
        for r in &self.regions {
            if !(r[0] >= 0.0 && r[1] >= r[0]) || !r[0].is_finite() || !r[1].is_finite() {
                return Err(Error::InvalidConfig(format!("bad velocity region {r:?}")));
            }
            if r[0] <= prev_hi {
                return Err(Error::InvalidConfig(
                    "velocity regions must be disjoint and ordered".into(),
                ));
            }
            prev_hi = r[1];
        }
        let total: f64 = self.masses.iter().sum();
        if (total - 1.0).abs() > 1e-12 || self.masses.iter().any(|&m| m < 0.0) {
            return Err(Error::InvalidConfig("region masses must sum to 1".into()));
        }
        Ok(())
    }

    /// Defaults: 16 snapshots at 0.5 ms, 2.1 GHz carrier, regions
    /// [0,5], [10,15], [20,25], [30,35] m/s with equal masses.
    pub fn default_desk(paths: usize) -> Self {
        Self {
            regions: [[0.0, 5.0], [10.0, 15.0], [20.0, 25.0], [30.0, 35.0]],
            masses: [0.25; 4],
            paths,
            cfg: ChannelConfig {
                m_sc: 1,
                m_sn: 16,
                m_r: 1,
                m_t: 1,
                delta_f: 15e3,
                delta_t: 5e-4,
                f_c: 2.1e9,
            },
        }
    }
}

/// Draws one labeled trajectory: region by mass, velocity uniform within the
/// region, per-path Doppler nu = (v f_c / c) cos(alpha) with alpha uniform on
/// [0, 2 pi), powers uniform then normalized, phases uniform. The returned
/// label is the 1-based region index.
pub fn sample_velocity_trajectory(
    sc: &VelocityScenario,
    streams: &mut ParamStreams,
) -> Result<(ChannelVec, u8)> {
    sc.validate()?;
    let u: f64 = streams.velocity.gen();
    let mut region = 3usize;
    let mut acc = 0.0;
    for (i, &mass) in sc.masses.iter().enumerate() {
        acc += mass;
        if u < acc {
            region = i;
            break;
        }
    }
    let [lo, hi] = sc.regions[region];
    let v = if lo == hi { lo } else { streams.velocity.gen_range(lo..hi) };
    let nu_max = v * sc.cfg.f_c / SPEED_OF_LIGHT;

    let mut paths = Vec::with_capacity(sc.paths);
    for _ in 0..sc.paths {
        let alpha: f64 = streams.doppler.gen_range(0.0..2.0 * PI);
        paths.push(PathParams {
            p: streams.power.gen_range(0.0..1.0f64).max(f64::MIN_POSITIVE),
            beta: streams.beta.gen_range(0.0..2.0 * PI),
            tau: 0.0,
            nu: nu_max * alpha.cos(),
            theta_r: 0.0,
            theta_t: 0.0,
        });
    }
    let total: f64 = paths.iter().map(|p| p.p).sum();
    for p in paths.iter_mut() {
        p.p /= total;
    }
    let h = synthesize_channel(&sc.cfg, &paths)?;
    Ok((h, region as u8 + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg_rx(m_r: usize) -> ChannelConfig {
        ChannelConfig::new(1, 1, m_r, 1, 15e3, 5e-4, 2.1e9).unwrap()
    }

    #[test]
    fn steering_broadside_is_all_ones() {
        let cfg = cfg_rx(4);
        let a = steering_vector(Domain::Rx, 0.0, 4, &cfg).unwrap();
        for k in 0..4 {
            assert_abs_diff_eq!(a[k].re, 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(a[k].im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn steering_endfire_alternates() {
        let cfg = cfg_rx(4);
        let a = steering_vector(Domain::Rx, PI / 2.0, 4, &cfg).unwrap();
        for k in 0..4 {
            let want = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert_abs_diff_eq!(a[k].re, want, epsilon = 1e-12);
            assert_abs_diff_eq!(a[k].im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn steering_frequency_half_period_delay() {
        let cfg = ChannelConfig::new(3, 1, 1, 1, 15e3, 5e-4, 2.1e9).unwrap();
        let tau = 1.0 / (2.0 * cfg.delta_f);
        let a = steering_vector(Domain::Frequency, tau, 3, &cfg).unwrap();
        let want = [1.0, -1.0, 1.0];
        for k in 0..3 {
            assert_abs_diff_eq!(a[k].re, want[k], epsilon = 1e-12);
            assert_abs_diff_eq!(a[k].im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn steering_rejects_bad_input() {
        let cfg = cfg_rx(4);
        assert!(steering_vector(Domain::Rx, f64::NAN, 4, &cfg).is_err());
        assert!(steering_vector(Domain::Rx, 0.0, 0, &cfg).is_err());
        assert!(steering_vector(Domain::Rx, 2.0, 4, &cfg).is_err());
    }

    fn zero_path(p: f64, beta: f64) -> PathParams {
        PathParams { p, beta, tau: 0.0, nu: 0.0, theta_r: 0.0, theta_t: 0.0 }
    }

    #[test]
    fn single_trivial_path_gives_all_ones() {
        let cfg = ChannelConfig::new(2, 2, 2, 2, 15e3, 5e-4, 2.1e9).unwrap();
        let h = synthesize_channel(&cfg, &[zero_path(1.0, 0.0)]).unwrap();
        assert_eq!(h.len(), 16);
        for v in h.iter() {
            assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn power_four_phase_pi_gives_minus_two() {
        let cfg = cfg_rx(3);
        let h = synthesize_channel(&cfg, &[zero_path(4.0, PI)]).unwrap();
        for v in h.iter() {
            assert_abs_diff_eq!(v.re, -2.0, epsilon = 1e-12);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn opposite_phases_cancel() {
        let cfg = cfg_rx(2);
        let h = synthesize_channel(&cfg, &[zero_path(1.0, 0.0), zero_path(1.0, PI)]).unwrap();
        assert_abs_diff_eq!(h.norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn sample_paths_is_deterministic_and_normalized() {
        let prior = PathPrior::spatial_three_path();
        let a = sample_paths(&prior, 3, &mut ParamStreams::new(7)).unwrap();
        let b = sample_paths(&prior, 3, &mut ParamStreams::new(7)).unwrap();
        assert_eq!(a, b);
        let total: f64 = a.iter().map(|p| p.p).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-14);
        for p in &a {
            assert!(p.validate().is_ok());
        }
    }

    #[test]
    fn zero_velocity_region_gives_static_trajectory() {
        let mut sc = VelocityScenario::default_desk(3);
        sc.regions[0] = [0.0, 0.0];
        sc.masses = [1.0, 0.0, 0.0, 0.0];
        let (h, label) = sample_velocity_trajectory(&sc, &mut ParamStreams::new(3)).unwrap();
        assert_eq!(label, 1);
        for k in 1..h.len() {
            assert_abs_diff_eq!((h[k] - h[0]).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn doppler_from_velocity_value() {
        let nu = 30.0 * 2.1e9 / SPEED_OF_LIGHT;
        assert_abs_diff_eq!(nu, 210.15, epsilon = 0.01);
    }

    #[test]
    fn rejects_overlapping_regions_and_bad_masses() {
        let mut sc = VelocityScenario::default_desk(3);
        sc.regions[1] = [4.0, 8.0];
        assert!(sc.validate().is_err());
        let mut sc = VelocityScenario::default_desk(3);
        sc.masses = [0.5, 0.5, 0.5, -0.5];
        assert!(sc.validate().is_err());
    }
}
