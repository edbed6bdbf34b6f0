//! Reflected (AP → RIS element → receiver) optical channel gains.
//!
//! Every path is non-line-of-sight. The AP-side factor of a path depends only
//! on the element's wall position, the receiver-side factor on the mirror
//! tilt `(omega, gamma)` and the device orientation.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{DeviceOrientation, Point3, Scenario, WallPlane};

/// One RIS element: wall position plus roll `omega` and yaw `gamma`, both in `[-π/2, π/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RisElementPose {
    pub index: usize,
    pub position: Point3,
    pub omega: f64,
    pub gamma: f64,
}

/// `m = -log2(cos Φ½)`.
pub fn lambertian_order(phi_half: f64) -> Result<f64> {
    if !(phi_half > 0.0 && phi_half < PI / 2.0) {
        return Err(Error::Domain {
            name: "phi_half",
            value: phi_half,
            domain: "(0, pi/2)",
        });
    }
    Ok(-phi_half.cos().log2())
}

/// Optical concentrator gain `f² / sin²(ξ_FoV)`.
pub fn concentrator_gain(refractive_index: f64, fov: f64) -> Result<f64> {
    if !(fov > 0.0 && fov <= PI / 2.0) {
        return Err(Error::Domain {
            name: "xi_fov",
            value: fov,
            domain: "(0, pi/2]",
        });
    }
    let s = fov.sin();
    Ok(refractive_index * refractive_index / (s * s))
}

fn unit_between(from: &Point3, to: &Point3) -> Result<Point3> {
    let d = to - from;
    let n = d.norm();
    if n == 0.0 {
        return Err(Error::DegenerateGeometry("coincident points".into()));
    }
    Ok(d / n)
}

/// Cosine of the incidence angle at a tilted receiver: the device normal
/// dotted with the unit vector from the receiver to the element. May be negative.
pub fn incidence_cosine(rx_pos: &Point3, orientation: &DeviceOrientation, element_pos: &Point3) -> Result<f64> {
    let dir = unit_between(rx_pos, element_pos)?;
    let (sa, ca) = orientation.alpha.sin_cos();
    let (sb, cb) = orientation.beta.sin_cos();
    Ok(dir.x * cb * sa + dir.y * sb * sa + dir.z * ca)
}

/// Mirror normal after roll `omega` and yaw `gamma`, in the wall frame:
/// `sinγ·cosω` along the wall tangent, `cosγ·cosω` along the inward normal,
/// `sinω` vertical.
pub fn element_normal(wall: WallPlane, omega: f64, gamma: f64) -> Point3 {
    let (so, co) = omega.sin_cos();
    let (sg, cg) = gamma.sin_cos();
    wall.tangent() * (sg * co) + wall.inward_normal() * (cg * co) + Point3::z() * so
}

/// Cosine of the irradiance angle leaving a tilted element towards `rx_pos`.
/// May be negative.
pub fn irradiance_cosine(
    element_pos: &Point3,
    wall: WallPlane,
    omega: f64,
    gamma: f64,
    rx_pos: &Point3,
) -> Result<f64> {
    let dir = unit_between(element_pos, rx_pos)?;
    Ok(element_normal(wall, omega, gamma).dot(&dir))
}

/// Scenario-wide constant `ρ (m+1) A_PD A_k G_c G_f / (2π²)`.
fn path_prefactor(s: &Scenario) -> Result<f64> {
    let p = &s.params;
    let m = lambertian_order(p.half_power_angle)?;
    let gc = concentrator_gain(p.refractive_index, p.fov)?;
    Ok(p.ris_reflectivity * (m + 1.0) * p.pd_area * s.layout.ris_panel.element_area() * gc * p.filter_gain
        / (2.0 * PI * PI))
}

/// `cosᵐ(Φ_k)·cos(ξ_k) / d_k²` for the AP → element hop, or 0 when either
/// cosine is non-positive. Φ_k is measured from the AP's downward normal,
/// ξ_k from the wall's inward normal.
fn ap_side_factor(ap: &Point3, element: &Point3, wall: WallPlane, m: f64) -> Result<f64> {
    let d = element - ap;
    let dist = d.norm();
    if dist == 0.0 {
        return Err(Error::DegenerateGeometry("AP coincides with an RIS element".into()));
    }
    let cos_irr = -d.z / dist;
    let cos_inc = wall.inward_normal().dot(&(-d)) / dist;
    if cos_irr <= 0.0 || cos_inc <= 0.0 {
        return Ok(0.0);
    }
    Ok((m * cos_irr.ln()).exp() * cos_inc / (dist * dist))
}

/// Gain of the path AP → element → receiver.
///
/// Zero when the incidence angle exceeds the field of view, or when any of
/// the geometric cosines is non-positive (the mirror or the AP faces away).
pub fn element_gain(
    scenario: &Scenario,
    pose: &RisElementPose,
    rx_pos: &Point3,
    rx_orientation: &DeviceOrientation,
) -> Result<f64> {
    let m = lambertian_order(scenario.params.half_power_angle)?;
    let wall = scenario.layout.ris_panel.wall;
    let ap = ap_side_factor(&scenario.layout.ap_position, &pose.position, wall, m)?;
    let normal = element_normal(wall, pose.omega, pose.gamma);
    let rx = Receiver::new(*rx_pos, rx_orientation);
    Ok(path_prefactor(scenario)? * ap * reflected_factor(&pose.position, &normal, &rx, scenario.params.fov.cos())?)
}

#[derive(Debug, Clone, Copy)]
struct Receiver {
    position: Point3,
    normal: Point3,
}

impl Receiver {
    fn new(position: Point3, orientation: &DeviceOrientation) -> Self {
        Self {
            position,
            normal: orientation.normal(),
        }
    }
}

/// `cos(Φ_ku)·cos(ξ_ku) / d_ku²` with FoV and sign gating.
fn reflected_factor(element: &Point3, normal: &Point3, rx: &Receiver, cos_fov: f64) -> Result<f64> {
    let d = rx.position - element;
    let dist2 = d.norm_squared();
    if dist2 == 0.0 {
        return Err(Error::DegenerateGeometry("receiver coincides with an RIS element".into()));
    }
    let dist = dist2.sqrt();
    let cos_irr = normal.dot(&d) / dist;
    let cos_inc = -rx.normal.dot(&d) / dist;
    if cos_irr <= 0.0 || cos_inc <= 0.0 || cos_inc < cos_fov {
        return Ok(0.0);
    }
    Ok(cos_irr * cos_inc / dist2)
}

/// Per-user gain vectors `h_u` (length K each) and Eve's vector `h_e`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelState {
    pub users: Vec<Vec<f64>>,
    pub eve: Vec<f64>,
}

impl ChannelState {
    pub fn num_elements(&self) -> usize {
        self.eve.len()
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    /// `H[k][u]`.
    pub fn gain(&self, k: usize, u: usize) -> f64 {
        self.users[u][k]
    }
}

/// Channel evaluator with every pose-independent quantity cached.
///
/// Building one costs `O(K)`; each [`ChannelModel::assemble`] call then costs
/// `O(K·(U+1))` with four trig calls per element.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    wall: WallPlane,
    prefactor: f64,
    cos_fov: f64,
    positions: Vec<Point3>,
    ap_factors: Vec<f64>,
    users: Vec<Receiver>,
    eve: Receiver,
}

impl ChannelModel {
    /// Model using the scenario's frozen device orientations.
    pub fn new(scenario: &Scenario) -> Result<Self> {
        Self::with_orientations(scenario, &scenario.user_orientations, &scenario.eve_orientation)
    }

    pub fn with_orientations(
        scenario: &Scenario,
        user_orientations: &[DeviceOrientation],
        eve_orientation: &DeviceOrientation,
    ) -> Result<Self> {
        let layout = &scenario.layout;
        if user_orientations.len() != layout.user_positions.len() {
            return Err(Error::SizeMismatch {
                what: "user orientations",
                expected: layout.user_positions.len(),
                actual: user_orientations.len(),
            });
        }
        let m = lambertian_order(scenario.params.half_power_angle)?;
        let wall = layout.ris_panel.wall;
        let positions = layout.element_positions();
        let ap_factors = positions
            .iter()
            .map(|p| ap_side_factor(&layout.ap_position, p, wall, m))
            .collect::<Result<Vec<_>>>()?;
        let users = layout
            .user_positions
            .iter()
            .zip(user_orientations)
            .map(|(p, o)| Receiver::new(*p, o))
            .collect();
        Ok(Self {
            wall,
            prefactor: path_prefactor(scenario)?,
            cos_fov: scenario.params.fov.cos(),
            positions,
            ap_factors,
            users,
            eve: Receiver::new(layout.eve_position, eve_orientation),
        })
    }

    pub fn num_elements(&self) -> usize {
        self.positions.len()
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn element_positions(&self) -> &[Point3] {
        &self.positions
    }

    /// Poses for the given angle vectors, indexed like the panel.
    pub fn poses(&self, omega: &[f64], gamma: &[f64]) -> Vec<RisElementPose> {
        self.positions
            .iter()
            .zip(omega.iter().zip(gamma))
            .enumerate()
            .map(|(index, (position, (&omega, &gamma)))| RisElementPose {
                index,
                position: *position,
                omega,
                gamma,
            })
            .collect()
    }

    /// Gains for element tilts `omega[k]`, `gamma[k]`.
    pub fn assemble(&self, omega: &[f64], gamma: &[f64]) -> Result<ChannelState> {
        let k = self.positions.len();
        for (what, v) in [("omega angles", omega), ("gamma angles", gamma)] {
            if v.len() != k {
                return Err(Error::SizeMismatch {
                    what,
                    expected: k,
                    actual: v.len(),
                });
            }
        }
        let mut users = vec![vec![0.0; k]; self.users.len()];
        let mut eve = vec![0.0; k];
        for e in 0..k {
            let ap = self.ap_factors[e];
            if ap == 0.0 {
                continue;
            }
            let scale = self.prefactor * ap;
            let normal = element_normal(self.wall, omega[e], gamma[e]);
            let pos = &self.positions[e];
            for (u, rx) in self.users.iter().enumerate() {
                users[u][e] = scale * reflected_factor(pos, &normal, rx, self.cos_fov)?;
            }
            eve[e] = scale * reflected_factor(pos, &normal, &self.eve, self.cos_fov)?;
        }
        Ok(ChannelState { users, eve })
    }

    pub fn assemble_poses(&self, poses: &[RisElementPose]) -> Result<ChannelState> {
        if poses.len() != self.positions.len() {
            return Err(Error::SizeMismatch {
                what: "RIS element poses",
                expected: self.positions.len(),
                actual: poses.len(),
            });
        }
        let omega: Vec<f64> = poses.iter().map(|p| p.omega).collect();
        let gamma: Vec<f64> = poses.iter().map(|p| p.gamma).collect();
        self.assemble(&omega, &gamma)
    }
}

/// Channel state for explicit element poses and device orientations.
pub fn assemble_channels(
    scenario: &Scenario,
    poses: &[RisElementPose],
    user_orientations: &[DeviceOrientation],
    eve_orientation: &DeviceOrientation,
) -> Result<ChannelState> {
    ChannelModel::with_orientations(scenario, user_orientations, eve_orientation)?.assemble_poses(poses)
}
