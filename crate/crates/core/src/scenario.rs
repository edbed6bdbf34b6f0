//! Physical deployment: room, access point, RIS panel, receivers and the
//! system constants that every other module reads.
//!
//! A [`Scenario`] is immutable once built. Device orientations are drawn
//! once at construction from the scenario seed, so two builds with the same
//! overrides and seed are identical.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::optimizer::GaConfig;
use crate::rates::PowerConsumptionModel;

/// Cartesian point or direction, metres.
pub type Point3 = Vector3<f64>;

pub const DEFAULT_ROOM_DIMS: [f64; 3] = [5.0, 5.0, 3.0];
pub const DEFAULT_RECEIVER_HEIGHT: f64 = 0.85;
pub const DEFAULT_ELEMENT_SIDE: f64 = 0.1;
pub const DEFAULT_PANEL_CENTER_HEIGHT: f64 = 1.5;
pub const DEFAULT_USER_RADIUS: f64 = 1.5;
pub const DEFAULT_EVE_FLOOR_XY: [f64; 2] = [4.5, 4.5];

/// Wall that carries the RIS panel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WallPlane {
    /// The wall at y = 0.
    Y0,
    /// The wall at y = room depth.
    YMax,
    /// The wall at x = 0.
    X0,
    /// The wall at x = room width.
    XMax,
}

impl WallPlane {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "y0" => Ok(WallPlane::Y0),
            "ymax" => Ok(WallPlane::YMax),
            "x0" => Ok(WallPlane::X0),
            "xmax" => Ok(WallPlane::XMax),
            other => Err(invalid("ris_wall", format!("unknown wall `{other}`"))),
        }
    }

    /// Unit normal pointing into the room.
    pub fn inward_normal(self) -> Point3 {
        match self {
            WallPlane::Y0 => Point3::new(0.0, 1.0, 0.0),
            WallPlane::YMax => Point3::new(0.0, -1.0, 0.0),
            WallPlane::X0 => Point3::new(1.0, 0.0, 0.0),
            WallPlane::XMax => Point3::new(-1.0, 0.0, 0.0),
        }
    }

    /// Horizontal in-plane axis: `inward_normal × ẑ`. Panel columns run along it.
    pub fn tangent(self) -> Point3 {
        self.inward_normal().cross(&Point3::z())
    }

    fn coordinate(self, dims: &Point3) -> (usize, f64) {
        match self {
            WallPlane::Y0 => (1, 0.0),
            WallPlane::YMax => (1, dims.y),
            WallPlane::X0 => (0, 0.0),
            WallPlane::XMax => (0, dims.x),
        }
    }
}

/// Rectangular mirror-array panel. `origin` is the lower corner where column 0
/// and row 0 meet; rows stack upwards, columns run along the wall tangent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RisPanel {
    pub wall: WallPlane,
    pub origin: Point3,
    pub rows: usize,
    pub cols: usize,
    pub element_side: f64,
}

impl RisPanel {
    pub fn element_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn element_area(&self) -> f64 {
        self.element_side * self.element_side
    }

    /// Panel of `rows × cols` elements centred horizontally on `wall` with its
    /// middle at `center_height`.
    pub fn centered(
        wall: WallPlane,
        room_dims: &Point3,
        rows: usize,
        cols: usize,
        element_side: f64,
        center_height: f64,
    ) -> Self {
        let t = wall.tangent();
        let (axis, value) = wall.coordinate(room_dims);
        let mut center = Point3::new(room_dims.x / 2.0, room_dims.y / 2.0, center_height);
        center[axis] = value;
        let half_w = cols as f64 * element_side / 2.0;
        let half_h = rows as f64 * element_side / 2.0;
        let origin = center - t * half_w - Point3::z() * half_h;
        Self {
            wall,
            origin,
            rows,
            cols,
            element_side,
        }
    }
}

/// Element-centre coordinates on the wall grid, row-major (`k = row * cols + col`).
pub fn element_positions(panel: &RisPanel) -> Vec<Point3> {
    let t = panel.wall.tangent();
    let s = panel.element_side;
    let mut out = Vec::with_capacity(panel.element_count());
    for r in 0..panel.rows {
        for c in 0..panel.cols {
            out.push(
                panel.origin + t * ((c as f64 + 0.5) * s) + Point3::z() * ((r as f64 + 0.5) * s),
            );
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomLayout {
    pub room_dims: Point3,
    pub ap_position: Point3,
    pub ris_panel: RisPanel,
    pub user_positions: Vec<Point3>,
    pub eve_position: Point3,
}

impl RoomLayout {
    pub fn element_positions(&self) -> Vec<Point3> {
        element_positions(&self.ris_panel)
    }

    pub fn contains(&self, p: &Point3) -> bool {
        (0..3).all(|i| p[i] >= 0.0 && p[i] <= self.room_dims[i])
    }

    pub fn validate(&self) -> Result<()> {
        if self.room_dims.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(invalid("room_dims", "all dimensions must be positive"));
        }
        if !(self.ris_panel.element_side > 0.0) {
            return Err(invalid("element_side", "must be positive"));
        }
        if self.ris_panel.element_count() == 0 {
            return Err(invalid("K", "the RIS needs at least one element"));
        }
        let (axis, value) = self.ris_panel.wall.coordinate(&self.room_dims);
        if (self.ris_panel.origin[axis] - value).abs() > 1e-9 {
            return Err(invalid("ris_origin", "origin is not on the declared wall"));
        }
        let check = |what: &str, p: &Point3| -> Result<()> {
            if self.contains(p) {
                Ok(())
            } else {
                Err(Error::OutsideRoom {
                    what: what.to_string(),
                    x: p.x,
                    y: p.y,
                    z: p.z,
                })
            }
        };
        check("AP", &self.ap_position)?;
        check("Eve", &self.eve_position)?;
        for (u, p) in self.user_positions.iter().enumerate() {
            check(&format!("user {}", u + 1), p)?;
        }
        let elements = self.element_positions();
        for (k, p) in elements.iter().enumerate() {
            check(&format!("RIS element {}", k + 1), p)?;
        }
        let receivers = self
            .user_positions
            .iter()
            .chain(std::iter::once(&self.eve_position));
        for rx in receivers.clone() {
            if elements.iter().any(|e| (e - rx).norm() == 0.0) || (rx - self.ap_position).norm() == 0.0 {
                return Err(Error::DegenerateGeometry(
                    "a receiver coincides with the AP or an RIS element".into(),
                ));
            }
        }
        if elements.iter().any(|e| (e - self.ap_position).norm() == 0.0) {
            return Err(Error::DegenerateGeometry(
                "the AP coincides with an RIS element".into(),
            ));
        }
        Ok(())
    }
}

/// System constants. Angles are radians, powers watts, rates bits/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParameters {
    /// Electrical transmit power of the AP, `P_S`.
    pub tx_power: f64,
    pub num_elements: usize,
    pub num_users: usize,
    /// Photodiode field of view.
    pub fov: f64,
    pub ris_reflectivity: f64,
    /// LED semi-angle at half power.
    pub half_power_angle: f64,
    pub filter_gain: f64,
    pub refractive_index: f64,
    /// Photodiode physical area, m². The default of 1e-2 puts desk-scale links in the
    /// tens-of-Mbit/s range; at 1e-4 every rate stays below 1 Mbit/s.
    pub pd_area: f64,
    /// Photodiode responsivity, A/W.
    pub responsivity: f64,
    pub bandwidth: f64,
    /// Noise power spectral density, A²/Hz.
    pub noise_psd: f64,
    /// Per-user minimum rate requirement.
    pub min_rate: f64,
    pub consumption: PowerConsumptionModel,
    pub ga: GaConfig,
}

impl Default for SystemParameters {
    fn default() -> Self {
        Self {
            tx_power: 5.0,
            num_elements: 100,
            num_users: 4,
            fov: 85f64.to_radians(),
            ris_reflectivity: 0.95,
            half_power_angle: 70f64.to_radians(),
            filter_gain: 1.0,
            refractive_index: 1.5,
            pd_area: 1e-2,
            responsivity: 0.53,
            bandwidth: 200e6,
            noise_psd: 1e-21,
            min_rate: 30e3,
            consumption: PowerConsumptionModel::default(),
            ga: GaConfig::default(),
        }
    }
}

impl SystemParameters {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("P_S", self.tx_power),
            ("G_f", self.filter_gain),
            ("f", self.refractive_index),
            ("A_pd", self.pd_area),
            ("R_pd", self.responsivity),
            ("B", self.bandwidth),
            ("N_o", self.noise_psd),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("{v} must be strictly positive")));
            }
        }
        if !(self.min_rate.is_finite() && self.min_rate >= 0.0) {
            return Err(invalid("R_min", "must be non-negative"));
        }
        if self.num_elements == 0 {
            return Err(invalid("K", "must be at least 1"));
        }
        if self.num_users == 0 {
            return Err(invalid("U", "must be at least 1"));
        }
        if !(self.fov > 0.0 && self.fov <= FRAC_PI_2) {
            return Err(invalid("xi_fov", "must lie in (0, 90] degrees"));
        }
        if !(self.ris_reflectivity > 0.0 && self.ris_reflectivity <= 1.0) {
            return Err(invalid("rho_ris", "reflectivity must lie in (0, 1]"));
        }
        if !(self.half_power_angle > 0.0 && self.half_power_angle < FRAC_PI_2) {
            return Err(invalid("phi_half", "must lie in (0, 90) degrees"));
        }
        self.consumption.validate()?;
        self.ga.validate()?;
        Ok(())
    }

    /// Scalars the rate formulas need.
    pub fn link(&self) -> LinkBudget {
        LinkBudget {
            tx_power: self.tx_power,
            responsivity: self.responsivity,
            bandwidth: self.bandwidth,
            noise_psd: self.noise_psd,
        }
    }
}

/// Receiver-side constants shared by every rate formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub tx_power: f64,
    pub responsivity: f64,
    pub bandwidth: f64,
    pub noise_psd: f64,
}

impl LinkBudget {
    pub fn noise_power(&self) -> f64 {
        self.noise_psd * self.bandwidth
    }
}

/// Handheld device tilt: `alpha` polar angle from vertical, `beta` azimuth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceOrientation {
    pub alpha: f64,
    pub beta: f64,
}

impl DeviceOrientation {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&alpha) {
            return Err(Error::Domain {
                name: "alpha",
                value: alpha,
                domain: "[0, pi/2]",
            });
        }
        if !(-PI..=PI).contains(&beta) {
            return Err(Error::Domain {
                name: "beta",
                value: beta,
                domain: "[-pi, pi]",
            });
        }
        Ok(Self { alpha, beta })
    }

    /// Photodiode facing the ceiling.
    pub const fn upward() -> Self {
        Self {
            alpha: 0.0,
            beta: 0.0,
        }
    }

    /// Unit normal of the photodiode.
    pub fn normal(&self) -> Point3 {
        let (sa, ca) = self.alpha.sin_cos();
        let (sb, cb) = self.beta.sin_cos();
        Point3::new(sa * cb, sa * sb, ca)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OrientationKind {
    LaplaceTruncated,
    Fixed { alpha: f64, beta: f64 },
}

/// Random device-orientation model: truncated Laplace polar angle, uniform azimuth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientationModel {
    pub alpha_mean: f64,
    pub alpha_std: f64,
    pub kind: OrientationKind,
    pub rng_seed: u64,
}

impl Default for OrientationModel {
    fn default() -> Self {
        Self {
            alpha_mean: 41f64.to_radians(),
            alpha_std: 9f64.to_radians(),
            kind: OrientationKind::LaplaceTruncated,
            rng_seed: 0,
        }
    }
}

impl OrientationModel {
    /// Laplace scale parameter; a Laplace law with scale `b` has std `b·√2`.
    pub fn laplace_scale(&self) -> f64 {
        self.alpha_std / std::f64::consts::SQRT_2
    }
}

/// Draw one device orientation.
///
/// The polar angle is rejection-sampled from the untruncated Laplace law until
/// it lands in `[0, π/2]`; the azimuth is uniform on `[-π, π]`.
pub fn sample_orientation<R: Rng + ?Sized>(model: &OrientationModel, rng: &mut R) -> DeviceOrientation {
    match model.kind {
        OrientationKind::Fixed { alpha, beta } => DeviceOrientation {
            alpha: alpha.clamp(0.0, FRAC_PI_2),
            beta: beta.clamp(-PI, PI),
        },
        OrientationKind::LaplaceTruncated => {
            let b = model.laplace_scale();
            let alpha = loop {
                // inverse CDF on u ∈ (-1/2, 1/2)
                let u: f64 = rng.random::<f64>() - 0.5;
                if u == -0.5 {
                    continue;
                }
                let a = model.alpha_mean - b * u.signum() * (1.0 - 2.0 * u.abs()).ln();
                if (0.0..=FRAC_PI_2).contains(&a) {
                    break a;
                }
            };
            let beta = rng.random_range(-PI..=PI);
            DeviceOrientation { alpha, beta }
        }
    }
}

/// How Eve holds her receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EveOrientationMode {
    Upward,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub layout: RoomLayout,
    pub params: SystemParameters,
    pub orientation_model: OrientationModel,
    pub eve_mode: EveOrientationMode,
    pub user_orientations: Vec<DeviceOrientation>,
    pub eve_orientation: DeviceOrientation,
}

impl Scenario {
    pub fn num_elements(&self) -> usize {
        self.params.num_elements
    }

    pub fn num_users(&self) -> usize {
        self.params.num_users
    }

    pub fn seed(&self) -> u64 {
        self.orientation_model.rng_seed
    }
}

/// One override value, as it appears in a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Number(f64),
    Text(String),
    Point([f64; 3]),
    Points(Vec<[f64; 3]>),
}

impl From<f64> for ParamValue {
    fn from(v: f64) -> Self {
        ParamValue::Number(v)
    }
}

impl From<&str> for ParamValue {
    fn from(v: &str) -> Self {
        ParamValue::Text(v.to_string())
    }
}

/// Parameter overrides keyed by scenario-file field name.
pub type Overrides = BTreeMap<String, ParamValue>;

/// Every key accepted by [`build_default_scenario`] and the scenario file.
pub const KNOWN_KEYS: &[&str] = &[
    "P_S", "K", "U", "xi_fov", "rho_ris", "phi_half", "G_f", "f", "A_pd", "R_pd", "B", "N_o",
    "R_min", "P_DAC", "P_Filter", "P_PA", "P_Driver", "P_TCircuit", "P_Element", "P_ADC",
    "P_TIA", "P_RCircuit", "room_dims", "ap_position", "ris_wall", "ris_origin", "ris_rows",
    "ris_cols", "element_side", "ris_center_height", "user_positions", "user_radius",
    "receiver_height", "eve_position", "alpha_mean", "alpha_std", "orientation", "fixed_alpha",
    "fixed_beta", "eve_orientation", "population", "generations", "crossover_prob",
    "mutation_prob", "mutation_sigma", "mutation_decay", "tournament_size", "elite_count", "pairs_per_generation",
];

/// Overrides for the full deployment (K = 100, U = 4); the built-in defaults already describe it.
pub fn paper_overrides() -> Overrides {
    Overrides::new()
}

/// Overrides for the desk-scale deployment (K = 30, U = 2).
pub fn desk_overrides() -> Overrides {
    let mut o = Overrides::new();
    o.insert("K".into(), 30.0.into());
    o.insert("U".into(), 2.0.into());
    o
}

fn number(key: &str, v: &ParamValue) -> Result<f64> {
    match v {
        ParamValue::Number(x) if x.is_finite() => Ok(*x),
        _ => Err(invalid(key, "expected a finite number")),
    }
}

fn count(key: &str, v: &ParamValue) -> Result<usize> {
    let x = number(key, v)?;
    if x < 0.0 || x.fract() != 0.0 {
        return Err(invalid(key, "expected a non-negative integer"));
    }
    Ok(x as usize)
}

fn point(key: &str, v: &ParamValue) -> Result<Point3> {
    match v {
        ParamValue::Point(p) => Ok(Point3::new(p[0], p[1], p[2])),
        _ => Err(invalid(key, "expected a 3-vector [x, y, z]")),
    }
}

fn text<'a>(key: &str, v: &'a ParamValue) -> Result<&'a str> {
    match v {
        ParamValue::Text(s) => Ok(s),
        _ => Err(invalid(key, "expected a string")),
    }
}

fn probability(key: &str, v: &ParamValue) -> Result<f64> {
    let x = number(key, v)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(invalid(key, "expected a probability in [0, 1]"));
    }
    Ok(x)
}

/// Split `k` into the most square `rows × cols` grid with `rows ≤ cols`.
pub fn grid_shape(k: usize) -> (usize, usize) {
    let mut rows = (k as f64).sqrt().floor() as usize;
    while rows > 1 && !k.is_multiple_of(rows) {
        rows -= 1;
    }
    let rows = rows.max(1);
    (rows, k / rows)
}

/// Users evenly spaced on a circle around the room centre.
pub fn circle_positions(room: &Point3, count: usize, radius: f64, height: f64) -> Vec<Point3> {
    (0..count)
        .map(|u| {
            let theta = 2.0 * PI * u as f64 / count as f64;
            Point3::new(
                room.x / 2.0 + radius * theta.cos(),
                room.y / 2.0 + radius * theta.sin(),
                height,
            )
        })
        .collect()
}

/// Build a scenario from defaults plus `overrides`. Device orientations are
/// drawn from `seed`; angles in `overrides` are degrees.
pub fn build_default_scenario(overrides: &Overrides, seed: u64) -> Result<Scenario> {
    let mut params = SystemParameters::default();
    let mut orient = OrientationModel {
        rng_seed: seed,
        ..OrientationModel::default()
    };
    let mut room = Point3::from(DEFAULT_ROOM_DIMS);
    let mut ap: Option<Point3> = None;
    let mut wall = WallPlane::Y0;
    let mut ris_origin: Option<Point3> = None;
    let mut rows: Option<usize> = None;
    let mut cols: Option<usize> = None;
    let mut k_override: Option<usize> = None;
    let mut u_override: Option<usize> = None;
    let mut element_side = DEFAULT_ELEMENT_SIDE;
    let mut center_height = DEFAULT_PANEL_CENTER_HEIGHT;
    let mut users: Option<Vec<Point3>> = None;
    let mut user_radius = DEFAULT_USER_RADIUS;
    let mut rx_height = DEFAULT_RECEIVER_HEIGHT;
    let mut eve: Option<Point3> = None;
    let mut fixed_alpha = 0.0;
    let mut fixed_beta = 0.0;
    let mut fixed_kind = false;
    let mut eve_mode = EveOrientationMode::Upward;

    for (key, v) in overrides {
        let c = &mut params.consumption;
        match key.as_str() {
            "P_S" => params.tx_power = number(key, v)?,
            "K" => k_override = Some(count(key, v)?),
            "U" => u_override = Some(count(key, v)?),
            "xi_fov" => params.fov = number(key, v)?.to_radians(),
            "rho_ris" => params.ris_reflectivity = number(key, v)?,
            "phi_half" => params.half_power_angle = number(key, v)?.to_radians(),
            "G_f" => params.filter_gain = number(key, v)?,
            "f" => params.refractive_index = number(key, v)?,
            "A_pd" => params.pd_area = number(key, v)?,
            "R_pd" => params.responsivity = number(key, v)?,
            "B" => params.bandwidth = number(key, v)?,
            "N_o" => params.noise_psd = number(key, v)?,
            "R_min" => params.min_rate = number(key, v)?,
            "P_DAC" => c.dac = number(key, v)?,
            "P_Filter" => c.filter = number(key, v)?,
            "P_PA" => c.power_amplifier = number(key, v)?,
            "P_Driver" => c.led_driver = number(key, v)?,
            "P_TCircuit" => c.tx_circuit = number(key, v)?,
            "P_Element" => c.per_element = number(key, v)?,
            "P_ADC" => c.adc = number(key, v)?,
            "P_TIA" => c.tia = number(key, v)?,
            "P_RCircuit" => c.rx_circuit = number(key, v)?,
            "room_dims" => room = point(key, v)?,
            "ap_position" => ap = Some(point(key, v)?),
            "ris_wall" => wall = WallPlane::parse(text(key, v)?)?,
            "ris_origin" => ris_origin = Some(point(key, v)?),
            "ris_rows" => rows = Some(count(key, v)?),
            "ris_cols" => cols = Some(count(key, v)?),
            "element_side" => element_side = number(key, v)?,
            "ris_center_height" => center_height = number(key, v)?,
            "user_positions" => match v {
                ParamValue::Points(ps) => {
                    users = Some(ps.iter().map(|p| Point3::new(p[0], p[1], p[2])).collect())
                }
                ParamValue::Point(p) => users = Some(vec![Point3::new(p[0], p[1], p[2])]),
                _ => return Err(invalid(key, "expected a list of 3-vectors")),
            },
            "user_radius" => user_radius = number(key, v)?,
            "receiver_height" => rx_height = number(key, v)?,
            "eve_position" => eve = Some(point(key, v)?),
            "alpha_mean" => orient.alpha_mean = number(key, v)?.to_radians(),
            "alpha_std" => orient.alpha_std = number(key, v)?.to_radians(),
            "orientation" => match text(key, v)? {
                "laplace" | "laplace-truncated" => fixed_kind = false,
                "fixed" => fixed_kind = true,
                other => return Err(invalid(key, format!("unknown orientation model `{other}`"))),
            },
            "fixed_alpha" => fixed_alpha = number(key, v)?.to_radians(),
            "fixed_beta" => fixed_beta = number(key, v)?.to_radians(),
            "eve_orientation" => match text(key, v)? {
                "up" | "upward" => eve_mode = EveOrientationMode::Upward,
                "random" => eve_mode = EveOrientationMode::Random,
                other => return Err(invalid(key, format!("unknown Eve orientation `{other}`"))),
            },
            "population" => params.ga.population = count(key, v)?,
            "generations" => params.ga.generations = count(key, v)?,
            "crossover_prob" => params.ga.crossover_prob = probability(key, v)?,
            "mutation_prob" => params.ga.mutation_prob = Some(probability(key, v)?),
            "mutation_sigma" => params.ga.mutation_sigma = number(key, v)?,
            "mutation_decay" => params.ga.mutation_decay = number(key, v)?,
            "tournament_size" => params.ga.tournament_size = count(key, v)?,
            "elite_count" => params.ga.elite_count = count(key, v)?,
            "pairs_per_generation" => params.ga.pairs_per_generation = Some(count(key, v)?),
            _ => return Err(Error::UnknownParameter(key.clone())),
        }
    }
    if fixed_kind {
        orient.kind = OrientationKind::Fixed {
            alpha: fixed_alpha,
            beta: fixed_beta,
        };
    }
    if orient.alpha_std <= 0.0 && !fixed_kind {
        return Err(invalid("alpha_std", "must be positive"));
    }

    // element grid
    let (rows, cols) = match (rows, cols, k_override) {
        (Some(r), Some(c), Some(k)) if r * c != k => {
            return Err(Error::ElementCountMismatch { rows: r, cols: c, k })
        }
        (Some(r), Some(c), _) => (r, c),
        (Some(r), None, Some(k)) | (None, Some(r), Some(k)) if r == 0 || k % r != 0 => {
            let c = k.checked_div(r).unwrap_or(0);
            return Err(Error::ElementCountMismatch { rows: r, cols: c, k });
        }
        (Some(r), None, Some(k)) => (r, k / r),
        (None, Some(c), Some(k)) => (k / c, c),
        (Some(_), None, None) | (None, Some(_), None) => {
            return Err(invalid("K", "give K, or both ris_rows and ris_cols"))
        }
        (None, None, k) => grid_shape(k.unwrap_or(params.num_elements)),
    };
    params.num_elements = rows * cols;

    let users = match users {
        Some(list) => {
            if let Some(u) = u_override {
                if u != list.len() {
                    return Err(invalid(
                        "U",
                        format!("U = {u} but {} user positions were given", list.len()),
                    ));
                }
            }
            list
        }
        None => circle_positions(
            &room,
            u_override.unwrap_or(params.num_users),
            user_radius,
            rx_height,
        ),
    };
    params.num_users = users.len();

    let ris_panel = match ris_origin {
        Some(origin) => RisPanel {
            wall,
            origin,
            rows,
            cols,
            element_side,
        },
        None => RisPanel::centered(wall, &room, rows, cols, element_side, center_height),
    };
    let layout = RoomLayout {
        room_dims: room,
        ap_position: ap.unwrap_or(Point3::new(room.x / 2.0, room.y / 2.0, room.z)),
        ris_panel,
        user_positions: users,
        eve_position: eve.unwrap_or(Point3::new(
            DEFAULT_EVE_FLOOR_XY[0],
            DEFAULT_EVE_FLOOR_XY[1],
            rx_height,
        )),
    };
    params.validate()?;
    layout.validate()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let user_orientations = (0..params.num_users)
        .map(|_| sample_orientation(&orient, &mut rng))
        .collect();
    let eve_orientation = match eve_mode {
        EveOrientationMode::Upward => DeviceOrientation::upward(),
        EveOrientationMode::Random => sample_orientation(&orient, &mut rng),
    };
    Ok(Scenario {
        layout,
        params,
        orientation_model: orient,
        eve_mode,
        user_orientations,
        eve_orientation,
    })
}

/// Parse a scenario file (TOML, flat key/value).
pub fn parse_overrides(text: &str) -> Result<Overrides> {
    let table: Overrides = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    for key in table.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Error::UnknownParameter(key.clone()));
        }
    }
    Ok(table)
}

pub fn load_overrides(path: &Path) -> Result<Overrides> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_overrides(&text)
}
