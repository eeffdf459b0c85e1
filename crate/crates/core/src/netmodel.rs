//! Spatial deployment, pathloss and instantaneous SIR.
//!
//! The leader sits at the origin. Followers form a PPP on a disk and jammers
//! a PPP on an annulus. All links see Rayleigh fading, so received powers
//! carry an `Exp(1)` gain. Powers are configured in dBm and converted to
//! milliwatts once, when the linear-scale accessors are called.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};

use crate::error::{Error, Result};

/// Follower intensity used throughout the reference scenario: 15 nodes on a
/// disk of radius 500 m.
pub const REFERENCE_FOLLOWER_INTENSITY: f64 = 15.0 / (PI * 500.0 * 500.0);
pub const REFERENCE_RADIUS: f64 = 500.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(r: f64, theta: f64) -> Self {
        Self { x: r * theta.cos(), y: r * theta.sin() }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Transmit powers, pathloss exponent and SIR thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub alpha: f64,
    pub p_leader_dbm: f64,
    pub p_follower_dbm: f64,
    pub p_jammer_dbm: f64,
    pub beta_dl_db: f64,
    pub beta_ul_db: f64,
}

impl ChannelParams {
    pub fn new(
        alpha: f64,
        p_leader_dbm: f64,
        p_follower_dbm: f64,
        p_jammer_dbm: f64,
        beta_dl_db: f64,
        beta_ul_db: f64,
    ) -> Result<Self> {
        let ch = Self { alpha, p_leader_dbm, p_follower_dbm, p_jammer_dbm, beta_dl_db, beta_ul_db };
        ch.validate()?;
        Ok(ch)
    }

    /// Reference powers (30/20/10 dBm), `alpha = 3`, and both thresholds at
    /// -20 dB.
    pub fn reference() -> Self {
        Self {
            alpha: 3.0,
            p_leader_dbm: 30.0,
            p_follower_dbm: 20.0,
            p_jammer_dbm: 10.0,
            beta_dl_db: -20.0,
            beta_ul_db: -20.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 2.0) || !self.alpha.is_finite() {
            return Err(Error::UnsupportedExponent(self.alpha));
        }
        let fields = [
            ("p_leader_dbm", self.p_leader_dbm),
            ("p_follower_dbm", self.p_follower_dbm),
            ("p_jammer_dbm", self.p_jammer_dbm),
            ("beta_dl_db", self.beta_dl_db),
            ("beta_ul_db", self.beta_ul_db),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")));
            }
        }
        for (name, v) in
            [("leader", self.p_leader_mw()), ("follower", self.p_follower_mw()), ("jammer", self.p_jammer_mw())]
        {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} power does not convert to a positive linear value"
                )));
            }
        }
        Ok(())
    }

    pub fn with_betas_db(mut self, beta_dl_db: f64, beta_ul_db: f64) -> Self {
        self.beta_dl_db = beta_dl_db;
        self.beta_ul_db = beta_ul_db;
        self
    }

    pub fn p_leader_mw(&self) -> f64 {
        db_to_linear(self.p_leader_dbm)
    }

    pub fn p_follower_mw(&self) -> f64 {
        db_to_linear(self.p_follower_dbm)
    }

    pub fn p_jammer_mw(&self) -> f64 {
        db_to_linear(self.p_jammer_dbm)
    }

    pub fn beta_dl(&self) -> f64 {
        db_to_linear(self.beta_dl_db)
    }

    pub fn beta_ul(&self) -> f64 {
        db_to_linear(self.beta_ul_db)
    }

    /// Jammer-to-leader power ratio `P_j / P`.
    pub fn gamma_dl(&self) -> f64 {
        self.p_jammer_mw() / self.p_leader_mw()
    }

    /// Jammer-to-follower power ratio `P_j / P_F`.
    pub fn gamma_ul(&self) -> f64 {
        self.p_jammer_mw() / self.p_follower_mw()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeploymentConfig {
    pub rho_follower: f64,
    pub radius: f64,
    pub seed: u64,
}

impl DeploymentConfig {
    pub fn new(rho_follower: f64, radius: f64, seed: u64) -> Result<Self> {
        let dep = Self { rho_follower, radius, seed };
        dep.validate()?;
        Ok(dep)
    }

    pub fn reference(seed: u64) -> Self {
        Self { rho_follower: REFERENCE_FOLLOWER_INTENSITY, radius: REFERENCE_RADIUS, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho_follower > 0.0 && self.rho_follower.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "follower intensity must be positive, got {}",
                self.rho_follower
            )));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("deployment radius must be positive, got {}", self.radius)));
        }
        Ok(())
    }

    pub fn mean_followers(&self) -> f64 {
        self.rho_follower * PI * self.radius * self.radius
    }
}

/// Region `[z1, z2]` (distance from the leader) where jammers are active.
///
/// `z1 == z2` is accepted and means an empty region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JammerAnnulus {
    pub z1: f64,
    pub z2: f64,
    pub rho_jammer: f64,
}

impl JammerAnnulus {
    pub fn new(z1: f64, z2: f64, rho_jammer: f64) -> Result<Self> {
        let jam = Self { z1, z2, rho_jammer };
        jam.validate()?;
        Ok(jam)
    }

    pub fn none() -> Self {
        Self { z1: 0.0, z2: 0.0, rho_jammer: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.z1 >= 0.0) || !(self.z2 >= self.z1) || !self.z2.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "jammer annulus requires 0 <= z1 <= z2 < inf, got [{}, {}]",
                self.z1, self.z2
            )));
        }
        if !(self.rho_jammer >= 0.0 && self.rho_jammer.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "jammer intensity must be non-negative, got {}",
                self.rho_jammer
            )));
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.rho_jammer == 0.0 || self.z1 == self.z2
    }

    pub fn area(&self) -> f64 {
        PI * (self.z2 * self.z2 - self.z1 * self.z1)
    }

    pub fn mean_jammers(&self) -> f64 {
        self.rho_jammer * self.area()
    }
}

/// One realization of follower and jammer locations. The leader is at the
/// origin.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PppField {
    pub followers: Vec<Point>,
    pub jammers: Vec<Point>,
}

impl PppField {
    pub fn leader(&self) -> Point {
        Point::ORIGIN
    }

    pub fn follower(&self, index: usize) -> Result<Point> {
        self.followers.get(index).copied().ok_or_else(|| {
            Error::InvalidParameter(format!("follower index {index} out of range ({} followers)", self.followers.len()))
        })
    }
}

pub fn sample_poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("positive finite Poisson mean");
    let n: f64 = dist.sample(rng);
    n as usize
}

/// `n` points uniform on the disk of the given radius centred at the origin.
pub fn sample_disk<R: Rng + ?Sized>(n: usize, radius: f64, rng: &mut R) -> Vec<Point> {
    sample_annulus(n, 0.0, radius, rng)
}

/// `n` points uniform (in area) on the annulus `[z1, z2]`, by inverting the
/// radial CDF.
pub fn sample_annulus<R: Rng + ?Sized>(n: usize, z1: f64, z2: f64, rng: &mut R) -> Vec<Point> {
    let (a2, b2) = (z1 * z1, z2 * z2);
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let theta = 2.0 * PI * rng.random::<f64>();
            Point::from_polar((a2 + u * (b2 - a2)).sqrt(), theta)
        })
        .collect()
}

pub fn sample_jammers<R: Rng + ?Sized>(jam: &JammerAnnulus, rng: &mut R) -> Vec<Point> {
    if jam.is_empty() {
        return Vec::new();
    }
    let n = sample_poisson_count(jam.mean_jammers(), rng);
    sample_annulus(n, jam.z1, jam.z2, rng)
}

/// Samples followers on the deployment disk and jammers on the annulus.
///
/// Followers are drawn first, then jammers, so the follower layout for a
/// given RNG state does not depend on the jammer configuration.
pub fn sample_field<R: Rng + ?Sized>(dep: &DeploymentConfig, jam: &JammerAnnulus, rng: &mut R) -> Result<PppField> {
    dep.validate()?;
    jam.validate()?;
    let n = sample_poisson_count(dep.mean_followers(), rng);
    let followers = sample_disk(n, dep.radius, rng);
    let jammers = sample_jammers(jam, rng);
    Ok(PppField { followers, jammers })
}

/// [`sample_field`] driven by `dep.seed`.
pub fn sample_field_seeded(dep: &DeploymentConfig, jam: &JammerAnnulus) -> Result<PppField> {
    let mut rng = crate::rng::stream(dep.seed, 0);
    sample_field(dep, jam, &mut rng)
}

/// Pathloss in dB at distance `d`: `10 alpha log10(d)`.
pub fn pathloss_db(d: f64, alpha: f64) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Domain(format!("pathloss needs a positive distance, got {d}")));
    }
    Ok(10.0 * alpha * d.log10())
}

/// Rayleigh fading power gain, `|h|^2 ~ Exp(1)`.
pub fn sample_rayleigh_power<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

/// Fading gains for one link: the desired signal and each jammer, in the
/// order of `PppField::jammers`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkFading {
    pub signal: f64,
    pub jammers: Vec<f64>,
}

impl LinkFading {
    pub fn unit(n_jammers: usize) -> Self {
        Self { signal: 1.0, jammers: vec![1.0; n_jammers] }
    }

    /// Draws the signal gain first, then one gain per jammer.
    pub fn sample<R: Rng + ?Sized>(n_jammers: usize, rng: &mut R) -> Self {
        let signal = sample_rayleigh_power(rng);
        let jammers = (0..n_jammers).map(|_| sample_rayleigh_power(rng)).collect();
        Self { signal, jammers }
    }
}

/// Aggregate jamming power (mW) received at `receiver`.
pub fn jamming_power(receiver: &Point, jammers: &[Point], gains: &[f64], p_jammer_mw: f64, alpha: f64) -> f64 {
    jammers
        .iter()
        .zip(gains)
        .filter(|(_, &g)| g > 0.0)
        .map(|(j, &g)| p_jammer_mw * g * j.distance(receiver).powf(-alpha))
        .sum()
}

/// `signal / interference`, with `+inf` when there is no interference.
pub fn sir_ratio(signal_mw: f64, interference_mw: f64) -> f64 {
    if interference_mw > 0.0 {
        signal_mw / interference_mw
    } else {
        f64::INFINITY
    }
}

/// Downlink SIR at follower `index` for the given fading gains. Jammer
/// distances are measured to the follower.
pub fn sir_downlink_with(field: &PppField, index: usize, ch: &ChannelParams, fading: &LinkFading) -> Result<f64> {
    let follower = field.follower(index)?;
    let r = follower.norm();
    if r == 0.0 {
        return Err(Error::DegenerateDistance);
    }
    check_gains(field, fading)?;
    let signal = ch.p_leader_mw() * fading.signal * r.powf(-ch.alpha);
    let interference = jamming_power(&follower, &field.jammers, &fading.jammers, ch.p_jammer_mw(), ch.alpha);
    Ok(sir_ratio(signal, interference))
}

/// Uplink SIR at the leader from follower `index`. Jammer distances are
/// measured to the leader.
pub fn sir_uplink_with(field: &PppField, index: usize, ch: &ChannelParams, fading: &LinkFading) -> Result<f64> {
    let follower = field.follower(index)?;
    let r = follower.norm();
    if r == 0.0 {
        return Err(Error::DegenerateDistance);
    }
    check_gains(field, fading)?;
    let signal = ch.p_follower_mw() * fading.signal * r.powf(-ch.alpha);
    let interference = jamming_power(&Point::ORIGIN, &field.jammers, &fading.jammers, ch.p_jammer_mw(), ch.alpha);
    Ok(sir_ratio(signal, interference))
}

fn check_gains(field: &PppField, fading: &LinkFading) -> Result<()> {
    if fading.jammers.len() != field.jammers.len() {
        return Err(Error::InvalidParameter(format!(
            "{} jammer gains supplied for {} jammers",
            fading.jammers.len(),
            field.jammers.len()
        )));
    }
    Ok(())
}

pub fn sir_downlink<R: Rng + ?Sized>(field: &PppField, index: usize, ch: &ChannelParams, rng: &mut R) -> Result<f64> {
    let fading = LinkFading::sample(field.jammers.len(), rng);
    sir_downlink_with(field, index, ch, &fading)
}

pub fn sir_uplink<R: Rng + ?Sized>(field: &PppField, index: usize, ch: &ChannelParams, rng: &mut R) -> Result<f64> {
    let fading = LinkFading::sample(field.jammers.len(), rng);
    sir_uplink_with(field, index, ch, &fading)
}
